//! Assembly of the steering subproblems as conic programs.
//!
//! Both programs share the same scaffolding over variables
//! `Σ_1..Σ_N, M_0..M_{N−1}, P_0..P_{N−1}`: the affine covariance recursion
//! as entrywise equalities (with `Σ_0` fixed to the initial covariance) and
//! one coupling block `[[M_k, P_k], [P_kᵀ, Σ_k]] ⪰ 0` per step.
//!
//! The shape-steering subproblem adds two Schur-complement epigraphs for
//! the quadratic terminal terms,
//!
//! ```text
//! [[s, c], [c, 1]] ⪰ 0              ⟺  s ≥ c²,   c = tr Σ_N − tr Σ_r
//! [[u, svec(Σ_N)ᵀ], [svec(Σ_N), I]] ⪰ 0  ⟺  u ≥ ‖Σ_N‖_F²
//! ```
//!
//! and minimizes `λ Σ tr(R_k M_k) + 4 s + 8 u − 16 ⟨G, Σ_N⟩` for the current
//! linearization matrix `G`.
//!
//! The Wasserstein baseline instead adjoins a free block `Y` with
//! `[[Σ_N, Y], [Yᵀ, Σ_target]] ⪰ 0` and minimizes
//! `λ Σ tr(R_k M_k) + tr Σ_N − 2 tr Y`; maximizing `tr Y` under that block
//! equals the Bures cross term `tr (Σ_t^{1/2} Σ_N Σ_t^{1/2})^{1/2}`, so the
//! terminal part equals `W²` up to the constant `tr Σ_target`, which is
//! dropped from the solver objective and restored in reported values.

use super::backend::{ConicBackend, ConicSolution, SolverStatus};
use super::program::{svec_len, ConicProgram, LinExpr, MatExpr, RectVar, SymVar, SQRT2};
use crate::gaussian::{SymmetricMatrix, TargetShape};
use crate::system::{SystemParams, TransformedPlan};
use crate::{Error, Result};

/// Solution of a steering subproblem, mapped back to plan coordinates.
#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub plan: TransformedPlan,
    pub objective_value: f64,
    pub status: SolverStatus,
    /// Raw backend termination detail, for diagnostics.
    pub detail: String,
    /// Value of `s` (trace-gap epigraph); shape-steering program only.
    pub trace_epigraph: Option<f64>,
    /// Value of `u` (Frobenius epigraph); shape-steering program only.
    pub norm_epigraph: Option<f64>,
    /// `tr Y` of the Bures cross block; Wasserstein program only.
    pub cross_trace: Option<f64>,
}

/// Variable handles shared by both programs.
struct Scaffold {
    sigma: Vec<SymVar>,
    m: Vec<SymVar>,
    /// `Σ_0` as a constant expression, `Σ_k` as variable expressions.
    sigma_exprs: Vec<MatExpr>,
}

/// Dynamics equalities + coupling blocks for all steps.
fn build_scaffold(prog: &mut ConicProgram, params: &SystemParams) -> Scaffold {
    let nx = params.state_dim();
    let nu = params.input_dim();
    let n = params.horizon();

    let sigma: Vec<SymVar> = (1..=n)
        .map(|k| prog.add_symmetric(&format!("sigma_{k}"), nx))
        .collect();
    let m: Vec<SymVar> = (0..n)
        .map(|k| prog.add_symmetric(&format!("m_{k}"), nu))
        .collect();
    let p: Vec<RectVar> = (0..n)
        .map(|k| prog.add_rectangular(&format!("p_{k}"), nu, nx))
        .collect();

    let mut sigma_exprs = Vec::with_capacity(n + 1);
    sigma_exprs.push(MatExpr::from_const(params.sigma0().matrix()));
    sigma_exprs.extend(sigma.iter().map(|v| v.expr()));

    for k in 0..n {
        let a = params.a(k);
        let b = params.b(k);
        let p_expr = p[k].expr();
        let cross = p_expr.transpose().mul_left(a).mul_right(&b.transpose());
        let rhs = sigma_exprs[k]
            .congruence(a)
            .add(&cross)
            .add(&cross.transpose())
            .add(&m[k].expr().congruence(b))
            .add(&MatExpr::from_const(params.w(k).matrix()));
        for j in 0..nx {
            for i in 0..=j {
                prog.add_equality(
                    sigma_exprs[k + 1].entry(i, j).clone() - rhs.entry(i, j).clone(),
                );
            }
        }
        let block = MatExpr::block_2x2(
            &m[k].expr(),
            &p_expr,
            &p_expr.transpose(),
            &sigma_exprs[k],
        );
        prog.add_psd(&block);
    }

    Scaffold {
        sigma,
        m,
        sigma_exprs,
    }
}

/// `Σ_k tr(R_k M_k)` as an expression.
fn energy_expr(params: &SystemParams, m: &[SymVar]) -> LinExpr {
    let nu = params.input_dim();
    let mut e = LinExpr::default();
    for (k, mk) in m.iter().enumerate() {
        let r = params.r(k).matrix();
        for i in 0..nu {
            e += mk.entry(i, i).scaled(r[(i, i)]);
            for j in (i + 1)..nu {
                e += mk.entry(i, j).scaled(2.0 * r[(i, j)]);
            }
        }
    }
    e
}

/// `⟨G, Σ⟩_F` as an expression over a symmetric variable.
fn frobenius_inner(g: &SymmetricMatrix, sigma: &SymVar) -> LinExpr {
    let n = g.dim();
    let mut e = LinExpr::default();
    for i in 0..n {
        e += sigma.entry(i, i).scaled(g.matrix()[(i, i)]);
        for j in (i + 1)..n {
            e += sigma.entry(i, j).scaled(2.0 * g.matrix()[(i, j)]);
        }
    }
    e
}

fn extract_plan(
    params: &SystemParams,
    scaffold_names: (usize, usize, usize),
    solution: &ConicSolution,
) -> Result<TransformedPlan> {
    let (n, _, _) = scaffold_names;
    let mut sigma = Vec::with_capacity(n + 1);
    sigma.push(params.sigma0().clone());
    for k in 1..=n {
        sigma.push(solution.symmetric(&format!("sigma_{k}"))?);
    }
    let mut m = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    for k in 0..n {
        m.push(solution.symmetric(&format!("m_{k}"))?);
        p.push(solution.rectangular(&format!("p_{k}"))?);
    }
    Ok(TransformedPlan { sigma, m, p })
}

/// The convex shape-steering subproblem for a fixed linearization matrix.
pub struct GwSubproblem {
    program: ConicProgram,
    params: SystemParams,
    target_trace: f64,
}

impl GwSubproblem {
    pub fn program(&self) -> &ConicProgram {
        &self.program
    }

    pub fn solve(&self, backend: &dyn ConicBackend) -> Result<SubproblemSolution> {
        let solution = backend.solve(&self.program)?;
        let n = self.params.horizon();
        let plan = extract_plan(&self.params, (n, 0, 0), &solution)?;
        Ok(SubproblemSolution {
            plan,
            objective_value: solution.objective_value,
            status: solution.status,
            detail: solution.detail.clone(),
            trace_epigraph: Some(solution.scalar("s")?),
            norm_epigraph: Some(solution.scalar("u")?),
            cross_trace: None,
        })
    }

    /// Flatten a feasible plan into program coordinates, with the epigraph
    /// scalars set to their tight values. Testing/diagnostic aid.
    pub fn point_from_plan(&self, plan: &TransformedPlan) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.program.n_scalar_vars()];
        write_plan_slots(&self.program, plan, &mut x)?;
        let sigma_n = plan.terminal();
        let c = sigma_n.trace() - self.target_trace;
        set_scalar(&self.program, "s", c * c, &mut x)?;
        let norm = sigma_n.frobenius_norm();
        set_scalar(&self.program, "u", norm * norm, &mut x)?;
        Ok(x)
    }
}

/// Build the convex subproblem minimizing
/// `λ Σ tr(R_k M_k) + 4 (tr Σ_N − tr Σ_r)² + 8 ‖Σ_N‖_F² − 16 ⟨G, Σ_N⟩`
/// over the dynamics and coupling constraints. `G` is the current
/// linearization of the alignment gain (a subgradient at the previous
/// iterate), and `tr Σ_r` is the full trace of the target regardless of
/// dimension padding.
pub fn build_gw_subproblem(
    params: &SystemParams,
    target: &TargetShape,
    lambda: f64,
    g: &SymmetricMatrix,
) -> Result<GwSubproblem> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid_input(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    if g.dim() != params.state_dim() {
        return Err(Error::invalid_input(format!(
            "linearization matrix has dimension {}, expected state dimension {}",
            g.dim(),
            params.state_dim()
        )));
    }
    g.require_psd("linearization matrix")?;

    let nx = params.state_dim();
    let mut prog = ConicProgram::new();
    let scaffold = build_scaffold(&mut prog, params);
    let s = prog.add_scalar("s");
    let u = prog.add_scalar("u");

    let sigma_n = *scaffold.sigma.last().expect("horizon >= 1");

    // s ≥ (tr Σ_N − tr Σ_r)²
    let gap = sigma_n.trace() - LinExpr::constant(target.trace());
    let trace_block = MatExpr::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => s.expr(),
        (1, 1) => LinExpr::constant(1.0),
        _ => gap.clone(),
    });
    prog.add_psd(&trace_block);

    // u ≥ ‖Σ_N‖_F² via the norm-preserving vectorization
    let d = svec_len(nx);
    let mut sv = Vec::with_capacity(d);
    for j in 0..nx {
        for i in 0..=j {
            let scale = if i == j { 1.0 } else { SQRT2 };
            sv.push(sigma_n.entry(i, j).scaled(scale));
        }
    }
    let norm_block = MatExpr::from_fn(d + 1, d + 1, |i, j| match (i, j) {
        (0, 0) => u.expr(),
        (0, c) => sv[c - 1].clone(),
        (r, 0) => sv[r - 1].clone(),
        (r, c) if r == c => LinExpr::constant(1.0),
        _ => LinExpr::default(),
    });
    prog.add_psd(&norm_block);

    let mut objective = energy_expr(params, &scaffold.m).scaled(lambda);
    objective += s.expr().scaled(4.0);
    objective += u.expr().scaled(8.0);
    objective += frobenius_inner(g, &sigma_n).scaled(-16.0);
    prog.set_objective(objective);

    Ok(GwSubproblem {
        program: prog,
        params: params.clone(),
        target_trace: target.trace(),
    })
}

/// The Wasserstein-terminal-cost program (a single convex solve).
pub struct WassersteinProblem {
    program: ConicProgram,
    params: SystemParams,
}

impl WassersteinProblem {
    pub fn program(&self) -> &ConicProgram {
        &self.program
    }

    pub fn solve(&self, backend: &dyn ConicBackend) -> Result<SubproblemSolution> {
        let solution = backend.solve(&self.program)?;
        let n = self.params.horizon();
        let plan = extract_plan(&self.params, (n, 0, 0), &solution)?;
        let y = solution.rectangular("y")?;
        Ok(SubproblemSolution {
            plan,
            objective_value: solution.objective_value,
            status: solution.status,
            detail: solution.detail.clone(),
            trace_epigraph: None,
            norm_epigraph: None,
            cross_trace: Some(y.trace()),
        })
    }

    /// Flatten a feasible plan into program coordinates with `Y = 0`
    /// (always feasible for the cross block). Testing/diagnostic aid.
    pub fn point_from_plan(&self, plan: &TransformedPlan) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.program.n_scalar_vars()];
        write_plan_slots(&self.program, plan, &mut x)?;
        Ok(x)
    }
}

/// Build the baseline program minimizing
/// `λ Σ tr(R_k M_k) + tr Σ_N − 2 tr Y` subject to the shared scaffolding and
/// `[[Σ_N, Y], [Yᵀ, Σ_target]] ⪰ 0`. The target must be positive definite
/// (tightness of the cross block needs one PD side).
pub fn build_wasserstein_problem(
    params: &SystemParams,
    sigma_target: &SymmetricMatrix,
    lambda: f64,
) -> Result<WassersteinProblem> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid_input(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    let nx = params.state_dim();
    if sigma_target.dim() != nx {
        return Err(Error::invalid_input(format!(
            "target has dimension {}, expected state dimension {nx}",
            sigma_target.dim()
        )));
    }
    if !sigma_target.is_pd() {
        return Err(Error::invalid_input(
            "Wasserstein target must be positive definite",
        ));
    }

    let mut prog = ConicProgram::new();
    let scaffold = build_scaffold(&mut prog, params);
    let y = prog.add_rectangular("y", nx, nx);

    let sigma_n_expr = scaffold.sigma_exprs.last().expect("horizon >= 1");
    let cross_block = MatExpr::block_2x2(
        sigma_n_expr,
        &y.expr(),
        &y.expr().transpose(),
        &MatExpr::from_const(sigma_target.matrix()),
    );
    prog.add_psd(&cross_block);

    let sigma_n = *scaffold.sigma.last().expect("horizon >= 1");
    let mut y_trace = LinExpr::default();
    for i in 0..nx {
        y_trace += y.entry(i, i);
    }
    let mut objective = energy_expr(params, &scaffold.m).scaled(lambda);
    objective += sigma_n.trace();
    objective += y_trace.scaled(-2.0);
    prog.set_objective(objective);

    Ok(WassersteinProblem {
        program: prog,
        params: params.clone(),
    })
}

fn set_scalar(prog: &ConicProgram, name: &str, value: f64, x: &mut [f64]) -> Result<()> {
    let block = prog
        .block(name)
        .ok_or_else(|| Error::invalid_input(format!("no variable named `{name}`")))?;
    x[block.offset] = value;
    Ok(())
}

fn write_plan_slots(prog: &ConicProgram, plan: &TransformedPlan, x: &mut [f64]) -> Result<()> {
    let n = plan.horizon();
    let write_sym = |name: &str, m: &SymmetricMatrix, x: &mut [f64]| -> Result<()> {
        let block = prog
            .block(name)
            .ok_or_else(|| Error::invalid_input(format!("no variable named `{name}`")))?;
        let mut idx = block.offset;
        for j in 0..m.dim() {
            for i in 0..=j {
                x[idx] = m.matrix()[(i, j)];
                idx += 1;
            }
        }
        Ok(())
    };
    for k in 1..=n {
        write_sym(&format!("sigma_{k}"), &plan.sigma[k], x)?;
    }
    for k in 0..n {
        write_sym(&format!("m_{k}"), &plan.m[k], x)?;
        let block = prog
            .block(&format!("p_{k}"))
            .ok_or_else(|| Error::invalid_input(format!("no variable named `p_{k}`")))?;
        let p = &plan.p[k];
        let mut idx = block.offset;
        for j in 0..p.ncols() {
            for i in 0..p.nrows() {
                x[idx] = p[(i, j)];
                idx += 1;
            }
        }
    }
    Ok(())
}
