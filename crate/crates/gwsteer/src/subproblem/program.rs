//! A minimal conic-program modeling layer.
//!
//! Programs are linear objectives over named matrix variables, subject to
//! scalar equality constraints and affine symmetric-matrix expressions
//! required positive semidefinite. All curvature must be lowered to PSD
//! blocks (Schur-complement epigraphs) before reaching this layer, which
//! keeps the backend contract minimal: zero cone + PSD cones + linear
//! objective.
//!
//! Symmetric matrices are vectorized upper-triangle column-major with
//! off-diagonal entries scaled by √2 ("svec"), so the vector inner product
//! equals the Frobenius inner product. That one convention is used
//! everywhere: variable storage, PSD cone rows and the norm epigraph block.

use nalgebra::DMatrix;

use crate::gaussian::SymmetricMatrix;

pub(crate) const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Number of free entries of an `n`-dimensional symmetric matrix.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of entry `(i, j)`, `i ≤ j`, in upper-triangle column-major
/// order: `(0,0), (0,1), (1,1), (0,2), ...`.
pub fn svec_index(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    j * (j + 1) / 2 + i
}

/// Inverse of [`svec_index`].
pub fn svec_coords(idx: usize) -> (usize, usize) {
    let mut j = 0;
    while svec_len(j + 1) <= idx {
        j += 1;
    }
    (idx - svec_len(j), j)
}

/// Norm-preserving vectorization of a symmetric matrix.
pub fn svec(s: &SymmetricMatrix) -> Vec<f64> {
    let n = s.dim();
    let mut out = Vec::with_capacity(svec_len(n));
    for j in 0..n {
        for i in 0..=j {
            let v = s.matrix()[(i, j)];
            out.push(if i == j { v } else { SQRT2 * v });
        }
    }
    out
}

/// Rebuild a symmetric matrix from its norm-preserving vectorization.
pub fn svec_inverse(x: &[f64], n: usize) -> SymmetricMatrix {
    assert_eq!(x.len(), svec_len(n));
    let mut m = DMatrix::zeros(n, n);
    let mut idx = 0;
    for j in 0..n {
        for i in 0..=j {
            let v = if i == j { x[idx] } else { x[idx] / SQRT2 };
            m[(i, j)] = v;
            m[(j, i)] = v;
            idx += 1;
        }
    }
    SymmetricMatrix::from_symmetric_unchecked(m)
}

/// What a named variable block holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// `n × n` symmetric; occupies `n(n+1)/2` scalar slots storing the
    /// plain upper-triangle entries (unscaled).
    Symmetric(usize),
    /// `rows × cols` unstructured; occupies `rows · cols` slots,
    /// column-major.
    Rectangular(usize, usize),
    Scalar,
}

impl VarKind {
    /// Number of scalar slots the block occupies.
    pub fn slot_count(&self) -> usize {
        match *self {
            VarKind::Symmetric(n) => svec_len(n),
            VarKind::Rectangular(r, c) => r * c,
            VarKind::Scalar => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct VarBlock {
    pub name: String,
    pub kind: VarKind,
    pub offset: usize,
}

/// Handle to a symmetric matrix variable.
#[derive(Debug, Clone, Copy)]
pub struct SymVar {
    pub(crate) dim: usize,
    pub(crate) offset: usize,
}

impl SymVar {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Affine expression for entry `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> LinExpr {
        assert!(i < self.dim && j < self.dim);
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        LinExpr::term(self.offset + svec_index(lo, hi), 1.0)
    }

    pub fn expr(&self) -> MatExpr {
        MatExpr::from_fn(self.dim, self.dim, |i, j| self.entry(i, j))
    }

    pub fn trace(&self) -> LinExpr {
        let mut e = LinExpr::default();
        for i in 0..self.dim {
            e += self.entry(i, i);
        }
        e
    }
}

/// Handle to a rectangular matrix variable.
#[derive(Debug, Clone, Copy)]
pub struct RectVar {
    pub(crate) rows: usize,
    pub(crate) cols: usize,
    pub(crate) offset: usize,
}

impl RectVar {
    pub fn entry(&self, i: usize, j: usize) -> LinExpr {
        assert!(i < self.rows && j < self.cols);
        LinExpr::term(self.offset + j * self.rows + i, 1.0)
    }

    pub fn expr(&self) -> MatExpr {
        MatExpr::from_fn(self.rows, self.cols, |i, j| self.entry(i, j))
    }
}

/// Handle to a scalar variable.
#[derive(Debug, Clone, Copy)]
pub struct ScalarVar {
    pub(crate) offset: usize,
}

impl ScalarVar {
    pub fn expr(&self) -> LinExpr {
        LinExpr::term(self.offset, 1.0)
    }
}

/// A sparse affine expression `Σ c_i x_i + constant` over the flat
/// variable vector.
#[derive(Debug, Clone, Default)]
pub struct LinExpr {
    pub(crate) terms: Vec<(usize, f64)>,
    pub(crate) constant: f64,
}

impl LinExpr {
    pub fn constant(c: f64) -> LinExpr {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn term(slot: usize, coef: f64) -> LinExpr {
        LinExpr {
            terms: vec![(slot, coef)],
            constant: 0.0,
        }
    }

    pub fn push(&mut self, slot: usize, coef: f64) {
        if coef != 0.0 {
            self.terms.push((slot, coef));
        }
    }

    pub fn scaled(&self, f: f64) -> LinExpr {
        LinExpr {
            terms: self.terms.iter().map(|&(s, c)| (s, c * f)).collect(),
            constant: self.constant * f,
        }
    }

    /// Merge duplicate slots and drop zeros; sorted by slot.
    pub fn compress(&self) -> LinExpr {
        let mut terms = self.terms.clone();
        terms.sort_by_key(|&(s, _)| s);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (s, c) in terms {
            match merged.last_mut() {
                Some((ls, lc)) if *ls == s => *lc += c,
                _ => merged.push((s, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        LinExpr {
            terms: merged,
            constant: self.constant,
        }
    }

    /// Evaluate at a point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(s, c)| c * x[s]).sum::<f64>()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.constant == 0.0
    }
}

impl std::ops::AddAssign<LinExpr> for LinExpr {
    fn add_assign(&mut self, rhs: LinExpr) {
        self.terms.extend(rhs.terms);
        self.constant += rhs.constant;
    }
}

impl std::ops::Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self += rhs;
        self
    }
}

impl std::ops::Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self += rhs.scaled(-1.0);
        self
    }
}

/// A dense matrix of affine expressions; the workhorse for assembling
/// covariance recursions and block constraints.
#[derive(Debug, Clone)]
pub struct MatExpr {
    rows: usize,
    cols: usize,
    entries: Vec<LinExpr>, // column-major
}

impl MatExpr {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> LinExpr) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                entries.push(f(i, j));
            }
        }
        MatExpr {
            rows,
            cols,
            entries,
        }
    }

    pub fn from_const(m: &DMatrix<f64>) -> Self {
        MatExpr::from_fn(m.nrows(), m.ncols(), |i, j| LinExpr::constant(m[(i, j)]))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatExpr::from_fn(rows, cols, |_, _| LinExpr::default())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &LinExpr {
        &self.entries[j * self.rows + i]
    }

    pub fn transpose(&self) -> MatExpr {
        MatExpr::from_fn(self.cols, self.rows, |i, j| self.entry(j, i).clone())
    }

    /// `C · self` for a constant matrix `C`.
    pub fn mul_left(&self, c: &DMatrix<f64>) -> MatExpr {
        assert_eq!(c.ncols(), self.rows);
        MatExpr::from_fn(c.nrows(), self.cols, |i, j| {
            let mut e = LinExpr::default();
            for p in 0..self.rows {
                let coef = c[(i, p)];
                if coef != 0.0 {
                    e += self.entry(p, j).scaled(coef);
                }
            }
            e
        })
    }

    /// `self · C` for a constant matrix `C`.
    pub fn mul_right(&self, c: &DMatrix<f64>) -> MatExpr {
        assert_eq!(self.cols, c.nrows());
        MatExpr::from_fn(self.rows, c.ncols(), |i, j| {
            let mut e = LinExpr::default();
            for p in 0..self.cols {
                let coef = c[(p, j)];
                if coef != 0.0 {
                    e += self.entry(i, p).scaled(coef);
                }
            }
            e
        })
    }

    /// `C · self · Cᵀ`.
    pub fn congruence(&self, c: &DMatrix<f64>) -> MatExpr {
        self.mul_left(c).mul_right(&c.transpose())
    }

    pub fn add(&self, other: &MatExpr) -> MatExpr {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        MatExpr::from_fn(self.rows, self.cols, |i, j| {
            self.entry(i, j).clone() + other.entry(i, j).clone()
        })
    }

    pub fn sub(&self, other: &MatExpr) -> MatExpr {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        MatExpr::from_fn(self.rows, self.cols, |i, j| {
            self.entry(i, j).clone() - other.entry(i, j).clone()
        })
    }

    /// `[[tl, tr], [bl, br]]`.
    pub fn block_2x2(tl: &MatExpr, tr: &MatExpr, bl: &MatExpr, br: &MatExpr) -> MatExpr {
        assert_eq!(tl.rows, tr.rows);
        assert_eq!(bl.rows, br.rows);
        assert_eq!(tl.cols, bl.cols);
        assert_eq!(tr.cols, br.cols);
        let rows = tl.rows + bl.rows;
        let cols = tl.cols + tr.cols;
        MatExpr::from_fn(rows, cols, |i, j| {
            match (i < tl.rows, j < tl.cols) {
                (true, true) => tl.entry(i, j).clone(),
                (true, false) => tr.entry(i, j - tl.cols).clone(),
                (false, true) => bl.entry(i - tl.rows, j).clone(),
                (false, false) => br.entry(i - tl.rows, j - tl.cols).clone(),
            }
        })
    }
}

/// One PSD constraint: an affine symmetric matrix expression, stored by its
/// upper triangle.
#[derive(Debug, Clone)]
pub struct PsdConstraint {
    pub dim: usize,
    /// Upper-triangle column-major, plain matrix entries.
    pub entries: Vec<LinExpr>,
}

/// A conic program: minimize a linear objective subject to scalar
/// equalities and PSD matrix constraints.
#[derive(Debug, Clone, Default)]
pub struct ConicProgram {
    pub(crate) blocks: Vec<VarBlock>,
    pub(crate) n_vars: usize,
    pub(crate) psd: Vec<PsdConstraint>,
    pub(crate) equalities: Vec<LinExpr>,
    pub(crate) objective: LinExpr,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    fn add_block(&mut self, name: &str, kind: VarKind) -> usize {
        assert!(
            self.blocks.iter().all(|b| b.name != name),
            "duplicate variable name `{name}`"
        );
        let offset = self.n_vars;
        self.blocks.push(VarBlock {
            name: name.to_string(),
            kind,
            offset,
        });
        self.n_vars += kind.slot_count();
        offset
    }

    pub fn add_symmetric(&mut self, name: &str, n: usize) -> SymVar {
        let offset = self.add_block(name, VarKind::Symmetric(n));
        SymVar { dim: n, offset }
    }

    pub fn add_rectangular(&mut self, name: &str, rows: usize, cols: usize) -> RectVar {
        let offset = self.add_block(name, VarKind::Rectangular(rows, cols));
        RectVar {
            rows,
            cols,
            offset,
        }
    }

    pub fn add_scalar(&mut self, name: &str) -> ScalarVar {
        let offset = self.add_block(name, VarKind::Scalar);
        ScalarVar { offset }
    }

    /// Constrain `expr == 0`.
    pub fn add_equality(&mut self, expr: LinExpr) {
        self.equalities.push(expr.compress());
    }

    /// Constrain a square, structurally symmetric matrix expression to the
    /// PSD cone. Panics if the expression is not symmetric after
    /// compression; that is a modeling bug, not bad data.
    pub fn add_psd(&mut self, m: &MatExpr) {
        assert_eq!(m.rows(), m.cols(), "PSD block must be square");
        let n = m.rows();
        let mut entries = Vec::with_capacity(svec_len(n));
        for j in 0..n {
            for i in 0..=j {
                let upper = m.entry(i, j).compress();
                let lower = m.entry(j, i).compress();
                assert!(
                    upper.constant == lower.constant && upper.terms == lower.terms,
                    "PSD block entry ({i},{j}) is not symmetric"
                );
                entries.push(upper);
            }
        }
        self.psd.push(PsdConstraint { dim: n, entries });
    }

    pub fn set_objective(&mut self, expr: LinExpr) {
        self.objective = expr.compress();
    }

    pub fn n_scalar_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_equalities(&self) -> usize {
        self.equalities.len()
    }

    pub fn psd_dims(&self) -> Vec<usize> {
        self.psd.iter().map(|p| p.dim).collect()
    }

    pub fn n_matrix_variables(&self) -> usize {
        self.blocks
            .iter()
            .filter(|b| !matches!(b.kind, VarKind::Scalar))
            .count()
    }

    pub fn n_scalar_variables(&self) -> usize {
        self.blocks
            .iter()
            .filter(|b| matches!(b.kind, VarKind::Scalar))
            .count()
    }

    pub(crate) fn block(&self, name: &str) -> Option<&VarBlock> {
        self.blocks.iter().find(|b| b.name == name)
    }

    /// Evaluate the objective at a candidate point (testing aid).
    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.eval(x)
    }

    /// Largest violation over all constraints at a candidate point:
    /// `max(|equality|, max(0, −λ_min(psd block)))` (testing aid).
    pub fn max_violation_at(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for eq in &self.equalities {
            worst = worst.max(eq.eval(x).abs());
        }
        for block in &self.psd {
            let vals: Vec<f64> = block.entries.iter().map(|e| e.eval(x)).collect();
            let mut m = DMatrix::zeros(block.dim, block.dim);
            let mut idx = 0;
            for j in 0..block.dim {
                for i in 0..=j {
                    m[(i, j)] = vals[idx];
                    m[(j, i)] = vals[idx];
                    idx += 1;
                }
            }
            let min_eig = SymmetricMatrix::from_symmetric_unchecked(m).min_eigenvalue();
            worst = worst.max((-min_eig).max(0.0));
        }
        worst
    }

    /// Serialize in a line-oriented sparse text format for cross-checking
    /// against other modeling tools:
    ///
    /// ```text
    /// conic-program v1
    /// var <name> sym <n> | rect <rows> <cols> | scalar    # one per block
    /// obj <slot>:<coef>... const=<c>
    /// eq <slot>:<coef>... const=<c>                       # expr == 0
    /// psd <dim> <entry>;<entry>;...                       # upper col-major
    /// ```
    ///
    /// where each `<entry>` is `<slot>:<coef>...[ const=<c>]` for the plain
    /// (unscaled) matrix entry.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::from("conic-program v1\n");
        for b in &self.blocks {
            match b.kind {
                VarKind::Symmetric(n) => writeln!(out, "var {} sym {}", b.name, n),
                VarKind::Rectangular(r, c) => writeln!(out, "var {} rect {} {}", b.name, r, c),
                VarKind::Scalar => writeln!(out, "var {} scalar", b.name),
            }
            .expect("string write");
        }
        let fmt_expr = |e: &LinExpr| {
            let mut s = String::new();
            for (slot, coef) in &e.terms {
                if !s.is_empty() {
                    s.push(' ');
                }
                write!(s, "{slot}:{coef}").expect("string write");
            }
            if e.constant != 0.0 || e.terms.is_empty() {
                if !s.is_empty() {
                    s.push(' ');
                }
                write!(s, "const={}", e.constant).expect("string write");
            }
            s
        };
        writeln!(out, "obj {}", fmt_expr(&self.objective)).expect("string write");
        for eq in &self.equalities {
            writeln!(out, "eq {}", fmt_expr(eq)).expect("string write");
        }
        for psd in &self.psd {
            let entries: Vec<String> = psd.entries.iter().map(&fmt_expr).collect();
            writeln!(out, "psd {} {}", psd.dim, entries.join(";")).expect("string write");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn svec_round_trip_and_norm() {
        let s = SymmetricMatrix::from_rows(&[
            &[1.0, 2.0, 3.0],
            &[2.0, 4.0, 5.0],
            &[3.0, 5.0, 6.0],
        ])
        .unwrap();
        let v = svec(&s);
        assert_eq!(v.len(), 6);
        // order: (0,0), (0,1), (1,1), (0,2), (1,2), (2,2)
        assert_relative_eq!(v[0], 1.0);
        assert_relative_eq!(v[1], SQRT2 * 2.0);
        assert_relative_eq!(v[2], 4.0);
        assert_relative_eq!(v[3], SQRT2 * 3.0);
        assert_relative_eq!(v[4], SQRT2 * 5.0);
        assert_relative_eq!(v[5], 6.0);
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        assert_relative_eq!(norm2.sqrt(), s.frobenius_norm(), epsilon = 1e-12);
        let back = svec_inverse(&v, 3);
        assert_relative_eq!((back.matrix() - s.matrix()).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn svec_coords_inverts_index() {
        for idx in 0..svec_len(5) {
            let (i, j) = svec_coords(idx);
            assert!(i <= j);
            assert_eq!(svec_index(i, j), idx);
        }
    }

    #[test]
    fn expressions_evaluate() {
        let mut prog = ConicProgram::new();
        let x = prog.add_symmetric("x", 2);
        let t = prog.add_scalar("t");
        // x stored as entries (0,0)=slot0, (0,1)=slot1, (1,1)=slot2, t=slot3
        let point = [1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(x.entry(0, 1).eval(&point), 2.0);
        assert_relative_eq!(x.entry(1, 0).eval(&point), 2.0);
        assert_relative_eq!(x.trace().eval(&point), 4.0);
        assert_relative_eq!(t.expr().eval(&point), 4.0);

        let e = x.trace().scaled(2.0) + LinExpr::constant(1.0) - t.expr();
        assert_relative_eq!(e.eval(&point), 2.0 * 4.0 + 1.0 - 4.0);
        let c = e.compress();
        assert!(c.terms.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn mat_expr_congruence_matches_dense() {
        let mut prog = ConicProgram::new();
        let x = prog.add_symmetric("x", 2);
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -0.5, 1.5]);
        let expr = x.expr().congruence(&c);
        // evaluate at X = [[1, 2], [2, 3]]
        let point = [1.0, 2.0, 3.0];
        let x_dense = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]);
        let expected = &c * x_dense * c.transpose();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(
                    expr.entry(i, j).eval(&point),
                    expected[(i, j)],
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn psd_block_checks_symmetry() {
        let mut prog = ConicProgram::new();
        let x = prog.add_symmetric("x", 2);
        prog.add_psd(&x.expr()); // fine
        assert_eq!(prog.psd_dims(), vec![2]);
    }

    #[test]
    #[should_panic(expected = "not symmetric")]
    fn psd_block_rejects_asymmetric() {
        let mut prog = ConicProgram::new();
        let y = prog.add_rectangular("y", 2, 2);
        prog.add_psd(&y.expr());
    }

    #[test]
    fn violation_and_dump() {
        let mut prog = ConicProgram::new();
        let x = prog.add_symmetric("x", 2);
        prog.add_equality(x.trace() - LinExpr::constant(1.0));
        prog.add_psd(&x.expr());
        prog.set_objective(x.entry(0, 0));

        // X = I/2 satisfies everything
        let feasible = [0.5, 0.0, 0.5];
        assert!(prog.max_violation_at(&feasible) < 1e-12);
        // X = diag(2, -1) violates both
        let infeasible = [2.0, 0.0, -1.0];
        assert!(prog.max_violation_at(&infeasible) >= 1.0);

        let dump = prog.dump();
        assert!(dump.starts_with("conic-program v1\n"));
        assert!(dump.contains("var x sym 2"));
        assert!(dump.contains("eq 0:1 2:1 const=-1"));
        assert!(dump.contains("psd 2"));
    }
}
