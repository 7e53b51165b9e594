//! Gaussian covariance geometry.
//!
//! Everything here is spectral: the Gaussian Gromov-Wasserstein (GGW)
//! discrepancy between zero-mean Gaussians depends on their covariances only
//! through sorted eigenvalues,
//!
//! ```text
//! GGW²(Σ_a, Σ_b) = 4 (tr Σ_a − tr Σ_b)² + 8 ‖D_a − D_b‖_F²
//! ```
//!
//! with `D` the descending eigenvalue diagonals, zero-padded when the
//! dimensions differ. The alignment gain `g(Σ) = tr(D_Σ D_r)` appearing in
//! its expansion is convex (it is `max_U tr(U Σ Uᵀ Σ_r)` over orthogonal
//! `U`, a maximum of linear functions), and `V D_r Vᵀ` built from the
//! eigenvectors `V` of `Σ` is a subgradient. Those two facts are what the
//! difference-of-convex solver in [`crate::dca`] rests on.
//!
//! The Bures-Wasserstein (2-Wasserstein) squared distance is provided as
//! the orientation-sensitive counterpart used by the baseline solver.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Relative tolerance used by PSD checks: eigenvalues of `S` in
/// `[-psd_tolerance(S), 0)` are treated as zero.
pub fn psd_tolerance(frobenius_norm: f64) -> f64 {
    1e-9 * frobenius_norm
}

/// A real symmetric matrix. Construction symmetrizes via `(S + Sᵀ)/2` and
/// rejects non-finite entries, so every held matrix is exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    m: DMatrix<f64>,
}

impl SymmetricMatrix {
    /// Symmetrize and wrap a square matrix.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid_input(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid_input("matrix has non-finite entries"));
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(SymmetricMatrix { m: sym })
    }

    /// Wrap a matrix that is symmetric by construction (debug-checked).
    pub(crate) fn from_symmetric_unchecked(m: DMatrix<f64>) -> Self {
        debug_assert!(m.is_square());
        debug_assert!(m.iter().all(|x| x.is_finite()));
        let sym = (&m + m.transpose()) * 0.5;
        SymmetricMatrix { m: sym }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid_input("ragged or non-square row data"));
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::new(m)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymmetricMatrix {
            m: DMatrix::from_diagonal(&DVector::from_row_slice(diag)),
        }
    }

    pub fn identity(n: usize) -> Self {
        SymmetricMatrix {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix {
            m: DMatrix::zeros(n, n),
        }
    }

    /// `c * I_n`.
    pub fn scaled_identity(n: usize, c: f64) -> Self {
        SymmetricMatrix {
            m: DMatrix::identity(n, n) * c,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum().eigenvalues().min()
    }

    /// PSD within the relative tolerance [`psd_tolerance`].
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -psd_tolerance(self.frobenius_norm())
    }

    /// Strictly positive definite (smallest eigenvalue > 0).
    pub fn is_pd(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }

    pub(crate) fn require_psd(&self, what: &str) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < -psd_tolerance(self.frobenius_norm()) {
            return Err(Error::invalid_input(format!(
                "{what} is not positive semidefinite (min eigenvalue {min:.3e})"
            )));
        }
        Ok(())
    }

    /// Clip negative eigenvalues to zero. Used to repair boundary-feasible
    /// covariances coming back from a conic solver before they are sampled
    /// from or stored as PSD.
    pub fn clip_psd(&self) -> SymmetricMatrix {
        let spec = self.spectrum();
        let clipped: Vec<f64> = spec.eigenvalues().iter().map(|&l| l.max(0.0)).collect();
        spec.recompose_with(&clipped)
    }

    /// Spectral square root with negative eigenvalues clipped to zero.
    pub fn sqrt_psd(&self) -> SymmetricMatrix {
        let spec = self.spectrum();
        let roots: Vec<f64> = spec
            .eigenvalues()
            .iter()
            .map(|&l| l.max(0.0).sqrt())
            .collect();
        spec.recompose_with(&roots)
    }

    /// Sorted eigendecomposition; see [`Spectrum`] for the ordering and
    /// sign conventions.
    pub fn spectrum(&self) -> Spectrum {
        Spectrum::of(self)
    }
}

/// Eigendecomposition of a symmetric matrix with a deterministic layout:
/// eigenvalues descending, ties kept in the input order produced by the
/// underlying solver, and each eigenvector's first non-negligible component
/// made positive. Any sign/tie choice yields the same subgradients; the
/// determinism is for reproducibility.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn of(s: &SymmetricMatrix) -> Spectrum {
        let eig = s.m.clone().symmetric_eigen();
        let n = s.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .expect("finite eigenvalues")
        });
        let mut values = DVector::zeros(n);
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            values[dst] = eig.eigenvalues[src];
            let mut col = eig.eigenvectors.column(src).clone_owned();
            // sign convention: first component with |v_i| > 1e-12 positive
            if let Some(lead) = col.iter().position(|&v| v.abs() > 1e-12) {
                if col[lead] < 0.0 {
                    col.neg_mut();
                }
            }
            vectors.set_column(dst, &col);
        }
        Spectrum {
            eigenvalues: values,
            eigenvectors: vectors,
        }
    }

    /// Eigenvalues in non-increasing order.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Orthogonal matrix; column `i` pairs with eigenvalue `i`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues zero-padded (or truncated) to length `n`. Padding keeps
    /// the descending order because callers only pad PSD spectra.
    pub fn eigenvalues_padded(&self, n: usize) -> DVector<f64> {
        let mut out = DVector::zeros(n);
        for i in 0..n.min(self.eigenvalues.len()) {
            out[i] = self.eigenvalues[i];
        }
        out
    }

    /// `V · diag(values) · Vᵀ` with this spectrum's eigenvectors.
    pub fn recompose_with(&self, values: &[f64]) -> SymmetricMatrix {
        let d = DMatrix::from_diagonal(&DVector::from_row_slice(values));
        SymmetricMatrix::from_symmetric_unchecked(
            &self.eigenvectors * d * self.eigenvectors.transpose(),
        )
    }
}

/// A zero-mean Gaussian state law. The mean is carried for completeness but
/// every in-scope problem is zero-mean (initial state, noise and policy all
/// have zero mean, so the covariance determines the law); non-zero means are
/// rejected where problems are loaded.
#[derive(Debug, Clone)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: SymmetricMatrix,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: SymmetricMatrix) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(Error::invalid_input(format!(
                "mean dimension {} does not match covariance dimension {}",
                mean.len(),
                cov.dim()
            )));
        }
        cov.require_psd("covariance")?;
        Ok(GaussianState { mean, cov })
    }

    pub fn zero_mean(cov: SymmetricMatrix) -> Result<Self> {
        let n = cov.dim();
        Self::new(DVector::zeros(n), cov)
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &SymmetricMatrix {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.cov.dim()
    }
}

/// A target covariance shape, possibly of a different dimension than the
/// state space, with its spectrum cached (the solvers look at the spectrum
/// every iteration).
#[derive(Debug, Clone)]
pub struct TargetShape {
    sigma_r: SymmetricMatrix,
    spectrum: Spectrum,
}

impl TargetShape {
    pub fn new(sigma_r: SymmetricMatrix) -> Result<Self> {
        sigma_r.require_psd("target covariance")?;
        let spectrum = sigma_r.spectrum();
        Ok(TargetShape { sigma_r, spectrum })
    }

    pub fn covariance(&self) -> &SymmetricMatrix {
        &self.sigma_r
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.sigma_r.dim()
    }

    /// Full trace of the target (all eigenvalues, regardless of padding).
    pub fn trace(&self) -> f64 {
        self.sigma_r.trace()
    }

    /// `‖D_r‖_F²`: the constant separating the full GGW² value from the
    /// expanded objective the solver minimizes.
    pub fn spectrum_norm_squared(&self) -> f64 {
        self.spectrum.eigenvalues().iter().map(|l| l * l).sum()
    }
}

fn padded_pair(a: &Spectrum, b: &Spectrum) -> (DVector<f64>, DVector<f64>) {
    let n = a.dim().max(b.dim());
    (a.eigenvalues_padded(n), b.eigenvalues_padded(n))
}

/// Squared Gaussian Gromov-Wasserstein discrepancy between zero-mean
/// Gaussians with covariances `sigma_a`, `sigma_b`:
///
/// ```text
/// GGW² = 4 (tr Σ_a − tr Σ_b)² + 8 ‖D_a − D_b‖_F²
/// ```
///
/// Dimensions may differ; the shorter spectrum is zero-padded. Symmetric in
/// its arguments and zero exactly when the padded spectra agree, so it is
/// invariant under rotations of either covariance.
pub fn ggw_squared(sigma_a: &SymmetricMatrix, sigma_b: &SymmetricMatrix) -> Result<f64> {
    sigma_a.require_psd("first covariance")?;
    sigma_b.require_psd("second covariance")?;
    let (da, db) = padded_pair(&sigma_a.spectrum(), &sigma_b.spectrum());
    let tr_gap = da.sum() - db.sum();
    let spec_gap = (&da - &db).norm_squared();
    Ok(4.0 * tr_gap * tr_gap + 8.0 * spec_gap)
}

/// The alignment gain `g(Σ_N) = tr(D_N D_r) = Σ_i λ_i(Σ_N) λ_i(Σ_r)` with
/// both spectra descending and zero-padded. Convex in `Σ_N`; it is the term
/// the difference-of-convex split linearizes.
pub fn gw_alignment_gain(sigma_n: &SymmetricMatrix, sigma_r: &SymmetricMatrix) -> Result<f64> {
    sigma_n.require_psd("first covariance")?;
    sigma_r.require_psd("second covariance")?;
    let (dn, dr) = padded_pair(&sigma_n.spectrum(), &sigma_r.spectrum());
    Ok(dn.dot(&dr))
}

/// Build `V · diag(padded target eigenvalues) · Vᵀ` for an orthogonal basis
/// `V` of the state space. For `V` the eigenvectors of `Σ_N` this is a
/// subgradient of [`gw_alignment_gain`] at `Σ_N`.
pub(crate) fn subgradient_from_basis(
    basis: &DMatrix<f64>,
    target: &Spectrum,
) -> SymmetricMatrix {
    let n = basis.nrows();
    let d = DMatrix::from_diagonal(&target.eigenvalues_padded(n));
    SymmetricMatrix::from_symmetric_unchecked(basis * d * basis.transpose())
}

/// A subgradient of `Σ ↦ tr(D_Σ D_r)` at `sigma_n`: with `Σ_N = V_N D_N V_Nᵀ`
/// and `D_r` the padded descending eigenvalues of `sigma_r`, returns
/// `V_N D_r V_Nᵀ` (positive semidefinite).
pub fn gw_subgradient(
    sigma_n: &SymmetricMatrix,
    sigma_r: &SymmetricMatrix,
) -> Result<SymmetricMatrix> {
    sigma_n.require_psd("first covariance")?;
    sigma_r.require_psd("second covariance")?;
    let vn = sigma_n.spectrum();
    Ok(subgradient_from_basis(
        vn.eigenvectors(),
        &sigma_r.spectrum(),
    ))
}

/// Maximize `tr(U A Uᵀ B)` over orthogonal `U`.
///
/// With eigendecompositions `A = V Λ Vᵀ` and `B = W Ξ Wᵀ` (eigenvalues
/// descending), an optimizer is `U* = W Vᵀ` and the optimal value is
/// `tr(Λ Ξ)`. Inputs need only be symmetric. Returns `(U*, value)`.
pub fn trace_max_orthogonal(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
) -> Result<(DMatrix<f64>, f64)> {
    if a.dim() != b.dim() {
        return Err(Error::invalid_input(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let sa = a.spectrum();
    let sb = b.spectrum();
    let u_star = sb.eigenvectors() * sa.eigenvectors().transpose();
    let value = sa.eigenvalues().dot(sb.eigenvalues());
    Ok((u_star, value))
}

/// Squared 2-Wasserstein (Bures-Wasserstein) distance between zero-mean
/// Gaussians:
///
/// ```text
/// W² = tr Σ_a + tr Σ_b − 2 tr (Σ_b^{1/2} Σ_a Σ_b^{1/2})^{1/2}
/// ```
///
/// Matrix square roots are spectral with negative eigenvalues clipped, so
/// singular (PSD) inputs are fine. Unlike [`ggw_squared`] this depends on
/// the orientation of the covariances, not just their spectra.
pub fn wasserstein2_squared(sigma_a: &SymmetricMatrix, sigma_b: &SymmetricMatrix) -> Result<f64> {
    if sigma_a.dim() != sigma_b.dim() {
        return Err(Error::invalid_input(format!(
            "dimension mismatch: {} vs {}",
            sigma_a.dim(),
            sigma_b.dim()
        )));
    }
    sigma_a.require_psd("first covariance")?;
    sigma_b.require_psd("second covariance")?;
    let root_b = sigma_b.sqrt_psd();
    let inner = SymmetricMatrix::from_symmetric_unchecked(
        root_b.matrix() * sigma_a.matrix() * root_b.matrix(),
    );
    let cross: f64 = inner
        .spectrum()
        .eigenvalues()
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .sum();
    Ok(sigma_a.trace() + sigma_b.trace() - 2.0 * cross)
}

/// Planar rotation matrix `R(θ) = [[cos θ, −sin θ], [sin θ, cos θ]]`.
pub fn rotation2(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Rotate a planar covariance: `Σ̂(θ) = R(θ)ᵀ Σ R(θ)`. Spectrum-preserving;
/// only defined for 2×2 covariances.
pub fn rotate_covariance(sigma: &SymmetricMatrix, theta: f64) -> Result<SymmetricMatrix> {
    if sigma.dim() != 2 {
        return Err(Error::UnsupportedDimension(format!(
            "rotate_covariance needs a 2x2 covariance, got {0}x{0}",
            sigma.dim()
        )));
    }
    sigma.require_psd("covariance")?;
    let r = rotation2(theta);
    Ok(SymmetricMatrix::from_symmetric_unchecked(
        r.transpose() * sigma.matrix() * &r,
    ))
}

/// Orientation of an anisotropic planar covariance: the angle `θ ∈ [0, π)`
/// with `Σ = R(θ)ᵀ · diag(λ₁, λ₂) · R(θ)` (λ₁ ≥ λ₂ the eigenvalues), i.e.
/// the parameter that [`rotate_covariance`] applied to the sorted diagonal
/// would need to reproduce `Σ`. Round-trips `rotate_covariance` on
/// anisotropic inputs.
///
/// Errors with [`Error::DegenerateShape`] when the eigenvalue gap is below
/// `1e-8 · tr Σ` (the orientation of a near-isotropic covariance is
/// meaningless).
pub fn principal_angle(sigma: &SymmetricMatrix) -> Result<f64> {
    if sigma.dim() != 2 {
        return Err(Error::UnsupportedDimension(format!(
            "principal_angle needs a 2x2 covariance, got {0}x{0}",
            sigma.dim()
        )));
    }
    sigma.require_psd("covariance")?;
    let spec = sigma.spectrum();
    let gap = spec.eigenvalues()[0] - spec.eigenvalues()[1];
    if gap <= 1e-8 * sigma.trace() {
        return Err(Error::DegenerateShape(format!(
            "eigenvalue gap {gap:.3e} too small to define an orientation"
        )));
    }
    // Leading eigenvector of R(θ)ᵀ D R(θ) is (cos θ, −sin θ).
    let v = spec.eigenvectors().column(0);
    let theta = (-v[1].atan2(v[0])).rem_euclid(std::f64::consts::PI);
    // rem_euclid can return π itself when the angle underflows from below
    if theta >= std::f64::consts::PI {
        Ok(0.0)
    } else {
        Ok(theta)
    }
}

/// Distance between two orientations modulo π (the period of a covariance
/// orientation).
pub fn angle_distance_mod_pi(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::PI);
    d.min(std::f64::consts::PI - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sym(rows: &[&[f64]]) -> SymmetricMatrix {
        SymmetricMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn spectrum_sorts_descending_with_permuted_diagonal() {
        let s = SymmetricMatrix::from_diagonal(&[1.0, 3.0]);
        let spec = s.spectrum();
        assert_eq!(spec.eigenvalues().as_slice(), &[3.0, 1.0]);
        // eigenvector columns are (e2, e1)
        assert_relative_eq!(spec.eigenvectors()[(1, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(spec.eigenvectors()[(0, 1)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn spectrum_of_2x2_by_hand() {
        // [[2,1],[1,2]]: eigenvalues 3, 1; leading eigenvector (1,1)/sqrt(2)
        let s = sym(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let spec = s.spectrum();
        assert_relative_eq!(spec.eigenvalues()[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(spec.eigenvalues()[1], 1.0, epsilon = 1e-12);
        let v = spec.eigenvectors().column(0).clone_owned();
        let inv_sqrt2 = 0.5f64.sqrt();
        assert_relative_eq!(v[0], inv_sqrt2, epsilon = 1e-12);
        assert_relative_eq!(v[1], inv_sqrt2, epsilon = 1e-12);
    }

    #[test]
    fn spectrum_identity_tie_break() {
        let spec = SymmetricMatrix::identity(2).spectrum();
        assert_eq!(spec.eigenvalues().as_slice(), &[1.0, 1.0]);
        assert_relative_eq!(
            (spec.eigenvectors() - DMatrix::<f64>::identity(2, 2)).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn non_finite_entries_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, 0.0, 1.0]);
        assert!(matches!(
            SymmetricMatrix::new(m),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn ggw_squared_by_hand() {
        // (3I, diag(2, 0.5)): 4(6-2.5)^2 + 8((3-2)^2 + (3-0.5)^2) = 107
        let a = SymmetricMatrix::scaled_identity(2, 3.0);
        let b = SymmetricMatrix::from_diagonal(&[2.0, 0.5]);
        assert_relative_eq!(ggw_squared(&a, &b).unwrap(), 107.0, epsilon = 1e-10);
    }

    #[test]
    fn ggw_squared_identical_is_zero() {
        let s = sym(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert_relative_eq!(ggw_squared(&s, &s).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ggw_squared_zero_pads_dimensions() {
        let a = SymmetricMatrix::from_diagonal(&[10.0, 0.0]);
        let b = SymmetricMatrix::from_diagonal(&[10.0]);
        assert_relative_eq!(ggw_squared(&a, &b).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ggw_squared_rejects_indefinite() {
        let a = SymmetricMatrix::from_diagonal(&[1.0, -1.0]);
        let b = SymmetricMatrix::identity(2);
        assert!(ggw_squared(&a, &b).is_err());
    }

    #[test]
    fn alignment_gain_by_hand() {
        let a = SymmetricMatrix::from_diagonal(&[4.0, 1.0]);
        let b = SymmetricMatrix::from_diagonal(&[2.0, 0.5]);
        assert_relative_eq!(gw_alignment_gain(&a, &b).unwrap(), 8.5, epsilon = 1e-12);
        // sorting makes it permutation-invariant
        let a2 = SymmetricMatrix::from_diagonal(&[1.0, 4.0]);
        assert_relative_eq!(gw_alignment_gain(&a2, &b).unwrap(), 8.5, epsilon = 1e-12);
        // zero matrix gives zero gain
        let z = SymmetricMatrix::zeros(2);
        assert_relative_eq!(gw_alignment_gain(&z, &b).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn subgradient_diagonal_case() {
        let a = SymmetricMatrix::from_diagonal(&[4.0, 1.0]);
        let b = SymmetricMatrix::from_diagonal(&[2.0, 0.5]);
        let g = gw_subgradient(&a, &b).unwrap();
        assert_relative_eq!(
            (g.matrix() - DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5])).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn subgradient_rotated_case_by_hand() {
        // eigenvectors (1,1)/√2 and (1,−1)/√2 → V D_r Vᵀ by outer products
        let a = sym(&[&[2.5, 1.5], &[1.5, 2.5]]);
        let b = SymmetricMatrix::from_diagonal(&[2.0, 0.5]);
        let g = gw_subgradient(&a, &b).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.25, 0.75, 0.75, 1.25]);
        assert_relative_eq!((g.matrix() - expected).norm(), 0.0, epsilon = 1e-12);
        // zero target gives the zero subgradient
        let z = SymmetricMatrix::zeros(2);
        let g0 = gw_subgradient(&a, &z).unwrap();
        assert_relative_eq!(g0.frobenius_norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_max_by_hand() {
        let a = SymmetricMatrix::from_diagonal(&[3.0, 1.0]);
        let b = SymmetricMatrix::from_diagonal(&[2.0, 1.0]);
        let (u, v) = trace_max_orthogonal(&a, &b).unwrap();
        assert_relative_eq!(v, 7.0, epsilon = 1e-12);
        assert_relative_eq!(
            (u - DMatrix::<f64>::identity(2, 2)).norm(),
            0.0,
            epsilon = 1e-12
        );

        let (u, v) = trace_max_orthogonal(
            &SymmetricMatrix::identity(3),
            &SymmetricMatrix::identity(3),
        )
        .unwrap();
        assert_relative_eq!(v, 3.0, epsilon = 1e-12);
        assert!(u.is_orthogonal(1e-12));

        // Λ = diag(3,1), Ξ = diag(5,1): value 16
        let a = sym(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let b = SymmetricMatrix::from_diagonal(&[5.0, 1.0]);
        let (u_star, v) = trace_max_orthogonal(&a, &b).unwrap();
        assert_relative_eq!(v, 16.0, epsilon = 1e-12);
        // the reported optimizer attains the reported value
        let attained = (&u_star * a.matrix() * u_star.transpose() * b.matrix()).trace();
        assert_relative_eq!(attained, v, epsilon = 1e-9);
    }

    #[test]
    fn trace_max_dimension_mismatch() {
        let a = SymmetricMatrix::identity(2);
        let b = SymmetricMatrix::identity(3);
        assert!(trace_max_orthogonal(&a, &b).is_err());
    }

    #[test]
    fn wasserstein_by_hand() {
        let i2 = SymmetricMatrix::identity(2);
        let four_i = SymmetricMatrix::scaled_identity(2, 4.0);
        assert_relative_eq!(wasserstein2_squared(&i2, &four_i).unwrap(), 2.0, epsilon = 1e-10);
        let s = sym(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert_relative_eq!(wasserstein2_squared(&s, &s).unwrap(), 0.0, epsilon = 1e-10);
        // same spectra, swapped axes: GGW is 0 but W² is not
        let a = SymmetricMatrix::from_diagonal(&[2.0, 0.5]);
        let b = SymmetricMatrix::from_diagonal(&[0.5, 2.0]);
        assert_relative_eq!(wasserstein2_squared(&a, &b).unwrap(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(ggw_squared(&a, &b).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rotate_covariance_by_hand() {
        let s = SymmetricMatrix::from_diagonal(&[2.0, 0.5]);
        let quarter = rotate_covariance(&s, std::f64::consts::FRAC_PI_2).unwrap();
        let expected = SymmetricMatrix::from_diagonal(&[0.5, 2.0]);
        assert_relative_eq!(
            (quarter.matrix() - expected.matrix()).norm(),
            0.0,
            epsilon = 1e-12
        );

        let same = rotate_covariance(&s, 0.0).unwrap();
        assert_relative_eq!((same.matrix() - s.matrix()).norm(), 0.0, epsilon = 1e-15);

        let eighth = rotate_covariance(&s, std::f64::consts::FRAC_PI_4).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.25, -0.75, -0.75, 1.25]);
        assert_relative_eq!((eighth.matrix() - expected).norm(), 0.0, epsilon = 1e-12);

        assert!(rotate_covariance(&SymmetricMatrix::identity(3), 0.1).is_err());
    }

    #[test]
    fn principal_angle_round_trip_and_degenerate() {
        let s = SymmetricMatrix::from_diagonal(&[2.0, 0.5]);
        assert_relative_eq!(principal_angle(&s).unwrap(), 0.0, epsilon = 1e-12);

        let rotated = rotate_covariance(&s, 1.2).unwrap();
        assert_relative_eq!(principal_angle(&rotated).unwrap(), 1.2, epsilon = 1e-10);

        assert!(matches!(
            principal_angle(&SymmetricMatrix::identity(2)),
            Err(Error::DegenerateShape(_))
        ));
    }

    #[test]
    fn ggw_rotation_invariance_vs_wasserstein_sensitivity() {
        let s = SymmetricMatrix::from_diagonal(&[2.0, 0.5]);
        let target = sym(&[&[1.0, 0.3], &[0.3, 0.7]]);
        let base = ggw_squared(&s, &target).unwrap();
        for k in 0..12 {
            let theta = k as f64 * 0.3;
            let rotated = rotate_covariance(&s, theta).unwrap();
            assert_relative_eq!(
                ggw_squared(&rotated, &target).unwrap(),
                base,
                epsilon = 1e-9
            );
        }
        // witness that W² is orientation-sensitive
        let swapped = rotate_covariance(&s, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(wasserstein2_squared(&s, &swapped).unwrap() > 0.5);
    }

    #[test]
    fn state_requires_matching_dims_and_psd() {
        let cov = SymmetricMatrix::identity(2);
        assert!(GaussianState::new(DVector::zeros(3), cov.clone()).is_err());
        let state = GaussianState::zero_mean(cov).unwrap();
        assert_eq!(state.dim(), 2);
        assert_eq!(state.mean().len(), 2);
        assert!(GaussianState::zero_mean(SymmetricMatrix::from_diagonal(&[-1.0])).is_err());
    }

    fn random_psd(n: usize, seed: u64) -> SymmetricMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        SymmetricMatrix::from_symmetric_unchecked(&m * m.transpose())
    }

    proptest! {
        #[test]
        fn prop_spectrum_reconstructs(seed in 0u64..500, n in 2usize..5) {
            let s = random_psd(n, seed);
            let spec = s.spectrum();
            let rebuilt = spec.recompose_with(spec.eigenvalues().as_slice());
            let vtv = spec.eigenvectors().transpose() * spec.eigenvectors();
            prop_assert!((vtv - DMatrix::<f64>::identity(n, n)).norm() < 1e-10);
            prop_assert!((rebuilt.matrix() - s.matrix()).norm() <= 1e-9 * s.frobenius_norm().max(1e-12));
            for i in 1..n {
                prop_assert!(spec.eigenvalues()[i - 1] >= spec.eigenvalues()[i]);
            }
        }

        #[test]
        fn prop_alignment_gain_convex(seed in 0u64..200, alpha in prop::sample::select(vec![0.25f64, 0.5, 0.75])) {
            let n = 2 + (seed % 3) as usize; // 2..4
            let s1 = random_psd(n, seed);
            let s2 = random_psd(n, seed.wrapping_add(7919));
            let target = random_psd(n, seed.wrapping_add(104729));
            let mix = SymmetricMatrix::from_symmetric_unchecked(
                s1.matrix() * alpha + s2.matrix() * (1.0 - alpha),
            );
            let lhs = gw_alignment_gain(&mix, &target).unwrap();
            let rhs = alpha * gw_alignment_gain(&s1, &target).unwrap()
                + (1.0 - alpha) * gw_alignment_gain(&s2, &target).unwrap();
            prop_assert!(lhs <= rhs + 1e-9, "convexity violated: {lhs} > {rhs}");
        }

        #[test]
        fn prop_subgradient_inequality(seed in 0u64..200) {
            let n = 2 + (seed % 3) as usize;
            let s = random_psd(n, seed);
            let s_other = random_psd(n, seed.wrapping_add(31337));
            let target = random_psd(n, seed.wrapping_add(271828));
            let g = gw_subgradient(&s, &target).unwrap();
            prop_assert!(g.is_psd());
            let gain_s = gw_alignment_gain(&s, &target).unwrap();
            let gain_other = gw_alignment_gain(&s_other, &target).unwrap();
            let inner = (g.matrix() * (s_other.matrix() - s.matrix())).trace();
            prop_assert!(
                gain_other >= gain_s + inner - 1e-9,
                "subgradient inequality violated: {gain_other} < {gain_s} + {inner}"
            );
        }

        #[test]
        fn prop_ggw_expansion_identity(seed in 0u64..200) {
            // GGW² = 4(Δtr)² + 8‖D_a‖² + 8‖D_b‖² − 16 g(Σ_a, Σ_b)
            let n = 2 + (seed % 3) as usize;
            let a = random_psd(n, seed);
            let b = random_psd(n + (seed % 2) as usize, seed.wrapping_add(99991));
            let lhs = ggw_squared(&a, &b).unwrap();
            let tr_gap = a.trace() - b.trace();
            let na: f64 = a.spectrum().eigenvalues().iter().map(|l| l * l).sum();
            let nb: f64 = b.spectrum().eigenvalues().iter().map(|l| l * l).sum();
            let rhs = 4.0 * tr_gap * tr_gap + 8.0 * na + 8.0 * nb
                - 16.0 * gw_alignment_gain(&a, &b).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
            // symmetric in its arguments, across dimensions too
            let flipped = ggw_squared(&b, &a).unwrap();
            prop_assert!((lhs - flipped).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }

        #[test]
        fn prop_frobenius_equals_spectrum_norm(seed in 0u64..200, n in 2usize..5) {
            let s = random_psd(n, seed);
            let from_spectrum: f64 = s.spectrum().eigenvalues().iter().map(|l| l * l).sum();
            prop_assert!((from_spectrum.sqrt() - s.frobenius_norm()).abs() < 1e-9);
        }

        #[test]
        fn prop_wasserstein_symmetric(seed in 0u64..100) {
            let a = random_psd(3, seed);
            let b = random_psd(3, seed.wrapping_add(55555));
            let ab = wasserstein2_squared(&a, &b).unwrap();
            let ba = wasserstein2_squared(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() < 1e-8);
            prop_assert!(ab >= -1e-9);
        }
    }
}
