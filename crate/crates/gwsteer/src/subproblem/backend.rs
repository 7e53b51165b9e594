//! Conic solver backend.
//!
//! The contract is deliberately small: a backend takes a [`ConicProgram`]
//! and returns the primal point with an honestly reported status. The
//! default implementation hands the program to the Clarabel interior-point
//! solver (zero cone for the equalities, scaled PSD triangle cones for the
//! matrix constraints). Clarabel is deterministic for a fixed program and
//! settings, which the iterative layers above rely on.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus as ClarabelStatus,
    SupportedConeT,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::program::{svec_len, ConicProgram, VarKind, SQRT2};
use crate::gaussian::SymmetricMatrix;
use crate::{Error, Result};

/// Interior-point settings exposed by the backend contract. `near_optimal`
/// acceptance corresponds to 10× these tolerances.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BackendSettings {
    /// Primal/dual feasibility tolerance.
    pub feas_tol: f64,
    /// Duality-gap tolerance (absolute and relative).
    pub gap_tol: f64,
    /// Interior-point iteration cap.
    pub max_iters: u32,
    /// Print solver progress to stdout.
    pub verbose: bool,
}

impl Default for BackendSettings {
    fn default() -> Self {
        BackendSettings {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iters: 200,
            verbose: false,
        }
    }
}

/// Solution quality as reported by the backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Optimal,
    /// Converged only to 10× the requested tolerances.
    NearOptimal,
    Infeasible,
    NumericalFailure,
}

impl SolverStatus {
    pub fn is_usable(&self) -> bool {
        matches!(self, SolverStatus::Optimal | SolverStatus::NearOptimal)
    }
}

impl std::fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolverStatus::Optimal => "optimal",
            SolverStatus::NearOptimal => "near_optimal",
            SolverStatus::Infeasible => "infeasible",
            SolverStatus::NumericalFailure => "numerical_failure",
        };
        f.write_str(s)
    }
}

/// Primal point of a solved program, addressable by variable name.
#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolverStatus,
    /// Backend termination detail (e.g. the raw solver status).
    pub detail: String,
    /// Objective value including any constant carried by the program.
    pub objective_value: f64,
    x: Vec<f64>,
    blocks: Vec<(String, VarKind, usize)>,
}

impl ConicSolution {
    fn block(&self, name: &str) -> Result<(VarKind, usize)> {
        self.blocks
            .iter()
            .find(|(n, _, _)| n == name)
            .map(|&(_, kind, offset)| (kind, offset))
            .ok_or_else(|| Error::invalid_input(format!("no variable named `{name}`")))
    }

    pub fn symmetric(&self, name: &str) -> Result<SymmetricMatrix> {
        match self.block(name)? {
            (VarKind::Symmetric(n), offset) => {
                let mut m = DMatrix::zeros(n, n);
                let mut idx = offset;
                for j in 0..n {
                    for i in 0..=j {
                        m[(i, j)] = self.x[idx];
                        m[(j, i)] = self.x[idx];
                        idx += 1;
                    }
                }
                Ok(SymmetricMatrix::from_symmetric_unchecked(m))
            }
            _ => Err(Error::invalid_input(format!("`{name}` is not symmetric"))),
        }
    }

    pub fn rectangular(&self, name: &str) -> Result<DMatrix<f64>> {
        match self.block(name)? {
            (VarKind::Rectangular(r, c), offset) => Ok(DMatrix::from_column_slice(
                r,
                c,
                &self.x[offset..offset + r * c],
            )),
            _ => Err(Error::invalid_input(format!(
                "`{name}` is not rectangular"
            ))),
        }
    }

    pub fn scalar(&self, name: &str) -> Result<f64> {
        match self.block(name)? {
            (VarKind::Scalar, offset) => Ok(self.x[offset]),
            _ => Err(Error::invalid_input(format!("`{name}` is not a scalar"))),
        }
    }

    /// The raw primal vector (testing aid).
    pub fn point(&self) -> &[f64] {
        &self.x
    }
}

/// Anything that can solve a [`ConicProgram`].
pub trait ConicBackend {
    fn solve(&self, program: &ConicProgram) -> Result<ConicSolution>;
}

/// Clarabel-based implementation of [`ConicBackend`].
#[derive(Debug, Clone, Default)]
pub struct ClarabelBackend {
    settings: BackendSettings,
}

impl ClarabelBackend {
    pub fn new(settings: BackendSettings) -> Self {
        ClarabelBackend { settings }
    }

    pub fn settings(&self) -> &BackendSettings {
        &self.settings
    }
}

/// Column-major triplet accumulator for the constraint matrix.
struct CscBuilder {
    rows: usize,
    cols: Vec<Vec<(usize, f64)>>,
}

impl CscBuilder {
    fn new(n_cols: usize) -> Self {
        CscBuilder {
            rows: 0,
            cols: vec![Vec::new(); n_cols],
        }
    }

    fn push_row(&mut self, entries: impl IntoIterator<Item = (usize, f64)>) -> usize {
        let row = self.rows;
        for (col, val) in entries {
            if val != 0.0 {
                self.cols[col].push((row, val));
            }
        }
        self.rows += 1;
        row
    }

    fn build(mut self) -> CscMatrix<f64> {
        let n = self.cols.len();
        let mut colptr = Vec::with_capacity(n + 1);
        let mut rowval = Vec::new();
        let mut nzval = Vec::new();
        colptr.push(0);
        for col in &mut self.cols {
            col.sort_by_key(|&(r, _)| r);
            for &(r, v) in col.iter() {
                rowval.push(r);
                nzval.push(v);
            }
            colptr.push(rowval.len());
        }
        CscMatrix::new(self.rows, n, colptr, rowval, nzval)
    }
}

impl ConicBackend for ClarabelBackend {
    /// Translate to Clarabel's `min qᵀx  s.t.  Ax + s = b, s ∈ K` form.
    ///
    /// Equalities `e(x) = 0` become zero-cone rows; a PSD constraint
    /// `S(x) ⪰ 0` becomes `svec(S(x)) ∈` scaled-triangle PSD cone, i.e.
    /// rows `−svec(∂S)·x + s = svec(const part)`.
    fn solve(&self, program: &ConicProgram) -> Result<ConicSolution> {
        let n = program.n_vars;
        let mut a = CscBuilder::new(n);
        let mut b: Vec<f64> = Vec::new();
        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();

        if !program.equalities.is_empty() {
            for eq in &program.equalities {
                a.push_row(eq.terms.iter().copied());
                b.push(-eq.constant);
            }
            cones.push(SupportedConeT::ZeroConeT(program.equalities.len()));
        }

        for block in &program.psd {
            debug_assert_eq!(block.entries.len(), svec_len(block.dim));
            let mut idx = 0;
            for j in 0..block.dim {
                for i in 0..=j {
                    let scale = if i == j { 1.0 } else { SQRT2 };
                    let entry = &block.entries[idx];
                    a.push_row(entry.terms.iter().map(|&(s, c)| (s, -scale * c)));
                    b.push(scale * entry.constant);
                    idx += 1;
                }
            }
            cones.push(SupportedConeT::PSDTriangleConeT(block.dim));
        }

        let a = a.build();
        let p = CscMatrix::<f64>::zeros((n, n));
        let mut q = vec![0.0; n];
        for &(slot, coef) in &program.objective.terms {
            q[slot] += coef;
        }

        let settings = DefaultSettingsBuilder::default()
            .verbose(self.settings.verbose)
            .max_iter(self.settings.max_iters)
            .tol_feas(self.settings.feas_tol)
            .tol_gap_abs(self.settings.gap_tol)
            .tol_gap_rel(self.settings.gap_tol)
            .reduced_tol_feas(10.0 * self.settings.feas_tol)
            .reduced_tol_gap_abs(10.0 * self.settings.gap_tol)
            .reduced_tol_gap_rel(10.0 * self.settings.gap_tol)
            .build()
            .map_err(|e| Error::SolverFailure(format!("bad backend settings: {e:?}")))?;

        let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
            .map_err(|e| Error::SolverFailure(format!("solver rejected program: {e:?}")))?;
        solver.solve();

        let raw = solver.solution.status;
        let status = match raw {
            ClarabelStatus::Solved => SolverStatus::Optimal,
            ClarabelStatus::AlmostSolved => SolverStatus::NearOptimal,
            ClarabelStatus::PrimalInfeasible | ClarabelStatus::DualInfeasible => {
                SolverStatus::Infeasible
            }
            _ => SolverStatus::NumericalFailure,
        };

        Ok(ConicSolution {
            status,
            detail: format!("{raw:?}"),
            objective_value: solver.solution.obj_val + program.objective.constant,
            x: solver.solution.x,
            blocks: program
                .blocks
                .iter()
                .map(|blk| (blk.name.clone(), blk.kind, blk.offset))
                .collect(),
        })
    }
}
