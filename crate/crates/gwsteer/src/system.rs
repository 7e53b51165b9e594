//! Discrete-time linear Gaussian dynamics.
//!
//! The state covariance under the policy `u_k(x) = N(K_k x, Q_k)` evolves as
//!
//! ```text
//! Σ_{k+1} = A Σ_k Aᵀ + B K_k Σ_k Aᵀ + A Σ_k K_kᵀ Bᵀ
//!         + B K_k Σ_k K_kᵀ Bᵀ + B Q_k Bᵀ + W_k .
//! ```
//!
//! The substitution `P_k = K_k Σ_k`, `M_k = P_k Σ_k⁻¹ P_kᵀ + Q_k` makes the
//! same recursion affine,
//!
//! ```text
//! Σ_{k+1} = A Σ_k Aᵀ + A P_kᵀ Bᵀ + B P_k Aᵀ + B M_k Bᵀ + W_k ,
//! ```
//!
//! at the price of the coupling constraint `[[M_k, P_k], [P_kᵀ, Σ_k]] ⪰ 0`,
//! which is exactly what the conic subproblems optimize over. This module
//! provides both propagations, the transform and its inverse (policy
//! recovery), control-energy accounting and seeded Monte Carlo rollouts.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::gaussian::SymmetricMatrix;
use crate::{Error, Result};

/// Time-varying system data over a horizon of `N` steps.
#[derive(Debug, Clone)]
pub struct SystemParams {
    a: Vec<DMatrix<f64>>,
    b: Vec<DMatrix<f64>>,
    w: Vec<SymmetricMatrix>,
    r: Vec<SymmetricMatrix>,
    sigma0: SymmetricMatrix,
}

impl SystemParams {
    /// Build and validate. All sequences must have length `horizon`; each
    /// `W_k` must be PSD, each `R_k` and `Σ_0` positive definite.
    pub fn new(
        a: Vec<DMatrix<f64>>,
        b: Vec<DMatrix<f64>>,
        w: Vec<SymmetricMatrix>,
        r: Vec<SymmetricMatrix>,
        horizon: usize,
        sigma0: SymmetricMatrix,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::invalid_input("horizon must be positive"));
        }
        for (name, len) in [("A", a.len()), ("B", b.len()), ("W", w.len()), ("R", r.len())] {
            if len != horizon {
                return Err(Error::invalid_input(format!(
                    "{name} has {len} entries, expected horizon {horizon}"
                )));
            }
        }
        let nx = sigma0.dim();
        let nu = b[0].ncols();
        for k in 0..horizon {
            if a[k].nrows() != nx || a[k].ncols() != nx {
                return Err(Error::invalid_input(format!(
                    "A[{k}] is {}x{}, expected {nx}x{nx}",
                    a[k].nrows(),
                    a[k].ncols()
                )));
            }
            if a[k].iter().any(|x| !x.is_finite()) || b[k].iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid_input(format!(
                    "A[{k}] or B[{k}] has non-finite entries"
                )));
            }
            if b[k].nrows() != nx || b[k].ncols() != nu {
                return Err(Error::invalid_input(format!(
                    "B[{k}] is {}x{}, expected {nx}x{nu}",
                    b[k].nrows(),
                    b[k].ncols()
                )));
            }
            if w[k].dim() != nx {
                return Err(Error::invalid_input(format!(
                    "W[{k}] has dimension {}, expected {nx}",
                    w[k].dim()
                )));
            }
            w[k].require_psd(&format!("W[{k}]"))?;
            if r[k].dim() != nu {
                return Err(Error::invalid_input(format!(
                    "R[{k}] has dimension {}, expected input dimension {nu}",
                    r[k].dim()
                )));
            }
            if !r[k].is_pd() {
                return Err(Error::invalid_input(format!(
                    "R[{k}] must be positive definite"
                )));
            }
        }
        if !sigma0.is_pd() {
            return Err(Error::invalid_input(
                "initial covariance must be positive definite",
            ));
        }
        Ok(SystemParams {
            a,
            b,
            w,
            r,
            sigma0,
        })
    }

    /// Constant matrices broadcast over the horizon.
    pub fn time_invariant(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        w: SymmetricMatrix,
        r: SymmetricMatrix,
        horizon: usize,
        sigma0: SymmetricMatrix,
    ) -> Result<Self> {
        Self::new(
            vec![a; horizon],
            vec![b; horizon],
            vec![w; horizon],
            vec![r; horizon],
            horizon,
            sigma0,
        )
    }

    pub fn horizon(&self) -> usize {
        self.a.len()
    }

    pub fn state_dim(&self) -> usize {
        self.sigma0.dim()
    }

    pub fn input_dim(&self) -> usize {
        self.b[0].ncols()
    }

    pub fn a(&self, k: usize) -> &DMatrix<f64> {
        &self.a[k]
    }

    pub fn b(&self, k: usize) -> &DMatrix<f64> {
        &self.b[k]
    }

    pub fn w(&self, k: usize) -> &SymmetricMatrix {
        &self.w[k]
    }

    pub fn r(&self, k: usize) -> &SymmetricMatrix {
        &self.r[k]
    }

    pub fn sigma0(&self) -> &SymmetricMatrix {
        &self.sigma0
    }

    /// `true` when every `A_k` is invertible (determinant bounded away from
    /// zero relative to its norm). The deterministic-policy property of the
    /// optimum is only guaranteed under invertible dynamics.
    pub fn dynamics_invertible(&self) -> bool {
        self.a.iter().all(|a| {
            let scale = a.norm().max(1e-300);
            let n = a.nrows() as i32;
            a.determinant().abs() > 1e-12 * scale.powi(n)
        })
    }

    /// Propagate covariances under a feedback policy (the quadratic form of
    /// the recursion). Returns `Σ_0 .. Σ_N`.
    pub fn propagate_policy(&self, policy: &Policy) -> Result<Vec<SymmetricMatrix>> {
        policy.check_shapes(self)?;
        let mut out = Vec::with_capacity(self.horizon() + 1);
        out.push(self.sigma0.clone());
        for k in 0..self.horizon() {
            let a = &self.a[k];
            let b = &self.b[k];
            let kk = &policy.k[k];
            let sigma = out[k].matrix();
            let closed = a + b * kk; // (A + BK) Σ (A + BK)ᵀ groups the four Σ terms
            let next = &closed * sigma * closed.transpose()
                + b * policy.q[k].matrix() * b.transpose()
                + self.w[k].matrix();
            out.push(SymmetricMatrix::from_symmetric_unchecked(next));
        }
        Ok(out)
    }

    /// Propagate covariances in transformed coordinates: affine in
    /// `(Σ_k, M_k, P_k)`. Returns `Σ_0 .. Σ_N`.
    pub fn propagate_transformed(
        &self,
        m: &[SymmetricMatrix],
        p: &[DMatrix<f64>],
    ) -> Result<Vec<SymmetricMatrix>> {
        let (nx, nu, n) = (self.state_dim(), self.input_dim(), self.horizon());
        if m.len() != n || p.len() != n {
            return Err(Error::invalid_input(format!(
                "expected {n} M and P blocks, got {} and {}",
                m.len(),
                p.len()
            )));
        }
        for k in 0..n {
            if m[k].dim() != nu {
                return Err(Error::invalid_input(format!(
                    "M[{k}] has dimension {}, expected {nu}",
                    m[k].dim()
                )));
            }
            if p[k].nrows() != nu || p[k].ncols() != nx {
                return Err(Error::invalid_input(format!(
                    "P[{k}] is {}x{}, expected {nu}x{nx}",
                    p[k].nrows(),
                    p[k].ncols()
                )));
            }
        }
        let mut out = Vec::with_capacity(n + 1);
        out.push(self.sigma0.clone());
        for k in 0..n {
            let a = &self.a[k];
            let b = &self.b[k];
            let sigma = out[k].matrix();
            let cross = a * p[k].transpose() * b.transpose();
            let next = a * sigma * a.transpose()
                + &cross
                + cross.transpose()
                + b * m[k].matrix() * b.transpose()
                + self.w[k].matrix();
            out.push(SymmetricMatrix::from_symmetric_unchecked(next));
        }
        Ok(out)
    }

    /// Uncontrolled propagation (`K = 0`, `Q = 0`).
    pub fn propagate_uncontrolled(&self) -> Vec<SymmetricMatrix> {
        let zero_m = vec![SymmetricMatrix::zeros(self.input_dim()); self.horizon()];
        let zero_p = vec![DMatrix::zeros(self.input_dim(), self.state_dim()); self.horizon()];
        self.propagate_transformed(&zero_m, &zero_p)
            .expect("zero plan is always shape-consistent")
    }

    /// `Σ_k tr(R_k M_k)`: the expected control energy `E[Σ u_kᵀ R_k u_k]`
    /// of the policy the plan encodes (without the λ weight).
    pub fn control_energy(&self, m: &[SymmetricMatrix]) -> Result<f64> {
        if m.len() != self.horizon() {
            return Err(Error::invalid_input(format!(
                "expected {} M blocks, got {}",
                self.horizon(),
                m.len()
            )));
        }
        let mut total = 0.0;
        for (k, (mk, rk)) in m.iter().zip(&self.r).enumerate() {
            if mk.dim() != self.input_dim() {
                return Err(Error::invalid_input(format!(
                    "M[{k}] has dimension {}, expected {}",
                    mk.dim(),
                    self.input_dim()
                )));
            }
            total += (rk.matrix() * mk.matrix()).trace();
        }
        Ok(total)
    }
}

/// A stochastic linear feedback policy `u_k(x) = N(K_k x, Q_k)`.
#[derive(Debug, Clone)]
pub struct Policy {
    k: Vec<DMatrix<f64>>,
    q: Vec<SymmetricMatrix>,
}

impl Policy {
    pub fn new(k: Vec<DMatrix<f64>>, q: Vec<SymmetricMatrix>) -> Result<Self> {
        if k.len() != q.len() {
            return Err(Error::invalid_input(format!(
                "policy has {} gains but {} covariances",
                k.len(),
                q.len()
            )));
        }
        if k.is_empty() {
            return Err(Error::invalid_input("policy must cover at least one step"));
        }
        for (i, qk) in q.iter().enumerate() {
            qk.require_psd(&format!("Q[{i}]"))?;
        }
        Ok(Policy { k, q })
    }

    /// The zero policy (`K = 0`, `Q = 0`): leaves the system uncontrolled.
    pub fn zero(params: &SystemParams) -> Policy {
        Policy {
            k: vec![DMatrix::zeros(params.input_dim(), params.state_dim()); params.horizon()],
            q: vec![SymmetricMatrix::zeros(params.input_dim()); params.horizon()],
        }
    }

    pub fn horizon(&self) -> usize {
        self.k.len()
    }

    pub fn gain(&self, k: usize) -> &DMatrix<f64> {
        &self.k[k]
    }

    pub fn noise_cov(&self, k: usize) -> &SymmetricMatrix {
        &self.q[k]
    }

    /// All injection covariances exactly zero.
    pub fn is_deterministic(&self) -> bool {
        self.q.iter().all(|q| q.frobenius_norm() == 0.0)
    }

    /// Largest `‖Q_k‖_F` (how far from deterministic the policy is).
    pub fn max_noise_norm(&self) -> f64 {
        self.q
            .iter()
            .map(|q| q.frobenius_norm())
            .fold(0.0, f64::max)
    }

    fn check_shapes(&self, params: &SystemParams) -> Result<()> {
        if self.horizon() != params.horizon() {
            return Err(Error::invalid_input(format!(
                "policy horizon {} does not match system horizon {}",
                self.horizon(),
                params.horizon()
            )));
        }
        for step in 0..self.horizon() {
            if self.k[step].nrows() != params.input_dim()
                || self.k[step].ncols() != params.state_dim()
            {
                return Err(Error::invalid_input(format!(
                    "K[{step}] is {}x{}, expected {}x{}",
                    self.k[step].nrows(),
                    self.k[step].ncols(),
                    params.input_dim(),
                    params.state_dim()
                )));
            }
            if self.q[step].dim() != params.input_dim() {
                return Err(Error::invalid_input(format!(
                    "Q[{step}] has dimension {}, expected {}",
                    self.q[step].dim(),
                    params.input_dim()
                )));
            }
        }
        Ok(())
    }
}

/// A plan in transformed coordinates: the decision variables of the conic
/// subproblems. `sigma` has length `N+1` (with `sigma[0] = Σ_0`), `m` and
/// `p` have length `N`.
#[derive(Debug, Clone)]
pub struct TransformedPlan {
    pub sigma: Vec<SymmetricMatrix>,
    pub m: Vec<SymmetricMatrix>,
    pub p: Vec<DMatrix<f64>>,
}

impl TransformedPlan {
    pub fn horizon(&self) -> usize {
        self.m.len()
    }

    pub fn terminal(&self) -> &SymmetricMatrix {
        self.sigma.last().expect("plan has at least Σ_0")
    }

    /// Lift a feedback policy into transformed coordinates by propagating
    /// its covariances and forming `P_k = K_k Σ_k`,
    /// `M_k = P_k Σ_k⁻¹ P_kᵀ + Q_k = K_k Σ_k K_kᵀ + Q_k`.
    pub fn from_policy(params: &SystemParams, policy: &Policy) -> Result<TransformedPlan> {
        let sigma = params.propagate_policy(policy)?;
        let mut m = Vec::with_capacity(params.horizon());
        let mut p = Vec::with_capacity(params.horizon());
        for (k, sigma_k) in sigma.iter().take(params.horizon()).enumerate() {
            let pk = policy.gain(k) * sigma_k.matrix();
            let mk = policy.gain(k) * sigma_k.matrix() * policy.gain(k).transpose()
                + policy.noise_cov(k).matrix();
            m.push(SymmetricMatrix::from_symmetric_unchecked(mk));
            p.push(pk);
        }
        Ok(TransformedPlan { sigma, m, p })
    }

    /// Invert the transform: `K_k = P_k Σ_k⁻¹`,
    /// `Q_k = M_k − P_k Σ_k⁻¹ P_kᵀ` (symmetrized, eigenvalues within the PSD
    /// tolerance clipped to zero).
    ///
    /// Each `Σ_k` must be safely invertible; a singular state covariance is
    /// an error rather than a silent pseudo-inverse, since it indicates a
    /// modeling problem (the noise keeps every reachable `Σ_k` positive
    /// definite in well-posed instances).
    pub fn recover_policy(&self) -> Result<Policy> {
        let n = self.horizon();
        let mut gains = Vec::with_capacity(n);
        let mut noise = Vec::with_capacity(n);
        for k in 0..n {
            let sigma = &self.sigma[k];
            let tol_inv = 1e-10 * sigma.trace().abs();
            let spec = sigma.spectrum();
            let min_eig = spec.eigenvalues()[sigma.dim() - 1];
            if min_eig <= tol_inv {
                return Err(Error::SingularCovariance(format!(
                    "Σ[{k}] has minimum eigenvalue {min_eig:.3e} (tolerance {tol_inv:.3e})"
                )));
            }
            let inv_vals: Vec<f64> = spec.eigenvalues().iter().map(|&l| 1.0 / l).collect();
            let sigma_inv = spec.recompose_with(&inv_vals);
            let gain = &self.p[k] * sigma_inv.matrix();
            let q_raw = self.m[k].matrix() - &gain * self.p[k].transpose();
            let q_sym = SymmetricMatrix::from_symmetric_unchecked(q_raw);
            // plans from the conic backend are feasible only to its
            // tolerance, so the clip band here is the plan-level 1e-6
            // rather than the tighter spectral tol_psd
            let tol = 1e-6 * (1.0 + self.m[k].frobenius_norm());
            let q_min = q_sym.min_eigenvalue();
            if q_min < -tol {
                return Err(Error::invalid_input(format!(
                    "M[{k}] − P Σ⁻¹ Pᵀ has eigenvalue {q_min:.3e} below −{tol:.3e}; \
                     the plan violates its coupling constraint"
                )));
            }
            gains.push(gain);
            noise.push(q_sym.clip_psd());
        }
        Policy::new(gains, noise)
    }

    /// Largest violation of the affine covariance recursion, relative to
    /// `‖Σ_{k+1}‖_F`, and the smallest eigenvalue over all coupling blocks
    /// `[[M_k, P_k], [P_kᵀ, Σ_k]]`. Diagnostic for solver output.
    pub fn feasibility_residuals(&self, params: &SystemParams) -> Result<(f64, f64)> {
        let propagated = params.propagate_transformed(&self.m, &self.p)?;
        let mut rel_dyn: f64 = (self.sigma[0].matrix() - params.sigma0().matrix()).norm()
            / params.sigma0().frobenius_norm().max(1e-12);
        for k in 0..self.horizon() {
            let denom = propagated[k + 1].frobenius_norm().max(1e-12);
            let err = (self.sigma[k + 1].matrix() - propagated[k + 1].matrix()).norm() / denom;
            rel_dyn = rel_dyn.max(err);
        }
        let mut min_eig = f64::INFINITY;
        for k in 0..self.horizon() {
            let block = coupling_block(&self.m[k], &self.p[k], &self.sigma[k]);
            min_eig = min_eig.min(block.min_eigenvalue());
        }
        Ok((rel_dyn, min_eig))
    }
}

/// Assemble `[[M, P], [Pᵀ, Σ]]`.
pub(crate) fn coupling_block(
    m: &SymmetricMatrix,
    p: &DMatrix<f64>,
    sigma: &SymmetricMatrix,
) -> SymmetricMatrix {
    let nu = m.dim();
    let nx = sigma.dim();
    let mut block = DMatrix::zeros(nu + nx, nu + nx);
    block.view_mut((0, 0), (nu, nu)).copy_from(m.matrix());
    block.view_mut((0, nu), (nu, nx)).copy_from(p);
    block.view_mut((nu, 0), (nx, nu)).copy_from(&p.transpose());
    block.view_mut((nu, nu), (nx, nx)).copy_from(sigma.matrix());
    SymmetricMatrix::from_symmetric_unchecked(block)
}

/// Sampled state trajectories, flattened as `(sample, step, coordinate)`.
#[derive(Debug, Clone)]
pub struct RolloutBatch {
    data: Vec<f64>,
    n_samples: usize,
    horizon: usize,
    state_dim: usize,
    seed: u64,
    deterministic_policy: bool,
}

impl RolloutBatch {
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Number of steps; each trajectory stores `horizon + 1` states.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn deterministic_policy(&self) -> bool {
        self.deterministic_policy
    }

    pub fn state(&self, sample: usize, k: usize) -> &[f64] {
        let stride = (self.horizon + 1) * self.state_dim;
        let start = sample * stride + k * self.state_dim;
        &self.data[start..start + self.state_dim]
    }

    /// Unbiased sample covariance about the sample mean at step `k`.
    pub fn empirical_covariance(&self, k: usize) -> Result<SymmetricMatrix> {
        if k > self.horizon {
            return Err(Error::invalid_input(format!(
                "step {k} out of range 0..={}",
                self.horizon
            )));
        }
        if self.n_samples < 2 {
            return Err(Error::invalid_input(
                "need at least two samples for a covariance",
            ));
        }
        let n = self.state_dim;
        let mut mean = DVector::zeros(n);
        for s in 0..self.n_samples {
            mean += DVector::from_row_slice(self.state(s, k));
        }
        mean /= self.n_samples as f64;
        let mut cov = DMatrix::zeros(n, n);
        for s in 0..self.n_samples {
            let d = DVector::from_row_slice(self.state(s, k)) - &mean;
            cov += &d * d.transpose();
        }
        cov /= (self.n_samples - 1) as f64;
        Ok(SymmetricMatrix::from_symmetric_unchecked(cov))
    }
}

/// Sample `n_samples` trajectories under a policy. Each sample draws from
/// its own counter-derived random stream keyed by `(seed, sample index)`,
/// so the batch is reproducible bit-for-bit and independent of scheduling;
/// samples are generated in parallel. Singular covariances are sampled
/// through their clipped spectral square roots.
pub fn rollout(
    params: &SystemParams,
    policy: &Policy,
    n_samples: usize,
    seed: u64,
) -> Result<RolloutBatch> {
    if n_samples == 0 {
        return Err(Error::invalid_input("n_samples must be positive"));
    }
    policy.check_shapes(params)?;
    let n = params.horizon();
    let nx = params.state_dim();
    let nu = params.input_dim();

    let sqrt_sigma0 = params.sigma0().sqrt_psd().into_matrix();
    let sqrt_w: Vec<DMatrix<f64>> = (0..n).map(|k| params.w(k).sqrt_psd().into_matrix()).collect();
    let sqrt_q: Vec<DMatrix<f64>> = (0..n)
        .map(|k| policy.noise_cov(k).sqrt_psd().into_matrix())
        .collect();

    let stride = (n + 1) * nx;
    let mut data = vec![0.0; n_samples * stride];

    data.par_chunks_mut(stride).enumerate().for_each(|(s, out)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        let draw = |len: usize, rng: &mut ChaCha8Rng| {
            DVector::from_fn(len, |_, _| StandardNormal.sample(rng))
        };
        let mut x = &sqrt_sigma0 * draw(nx, &mut rng);
        out[0..nx].copy_from_slice(x.as_slice());
        for k in 0..n {
            let u = policy.gain(k) * &x + &sqrt_q[k] * draw(nu, &mut rng);
            let w = &sqrt_w[k] * draw(nx, &mut rng);
            x = params.a(k) * &x + params.b(k) * u + w;
            out[(k + 1) * nx..(k + 2) * nx].copy_from_slice(x.as_slice());
        }
    });

    Ok(RolloutBatch {
        data,
        n_samples,
        horizon: n,
        state_dim: nx,
        seed,
        deterministic_policy: policy.is_deterministic(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    /// The planar benchmark system used throughout the tests.
    pub(crate) fn planar_params() -> SystemParams {
        SystemParams::time_invariant(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.1, -0.3, 1.0]),
            DMatrix::from_row_slice(2, 1, &[0.7, 0.4]),
            SymmetricMatrix::scaled_identity(2, 0.5),
            SymmetricMatrix::identity(1),
            10,
            SymmetricMatrix::scaled_identity(2, 3.0),
        )
        .unwrap()
    }

    #[test]
    fn one_step_uncontrolled_by_hand() {
        // 3 A Aᵀ + 0.5 I
        let params = planar_params();
        let sigmas = params.propagate_uncontrolled();
        let expected = DMatrix::from_row_slice(2, 2, &[3.53, -0.6, -0.6, 3.77]);
        assert_relative_eq!((sigmas[1].matrix() - &expected).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_dynamics_no_noise_is_constant() {
        let params = SystemParams::time_invariant(
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 1, &[0.3, -0.9]),
            SymmetricMatrix::zeros(2),
            SymmetricMatrix::identity(1),
            5,
            SymmetricMatrix::scaled_identity(2, 2.0),
        )
        .unwrap();
        for sigma in params.propagate_uncontrolled() {
            assert_relative_eq!(
                (sigma.matrix() - params.sigma0().matrix()).norm(),
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn zero_dynamics_leaves_noise_only() {
        let w = SymmetricMatrix::from_rows(&[&[0.7, 0.2], &[0.2, 0.4]]).unwrap();
        let params = SystemParams::time_invariant(
            DMatrix::zeros(2, 2),
            DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
            w.clone(),
            SymmetricMatrix::identity(1),
            4,
            SymmetricMatrix::identity(2),
        )
        .unwrap();
        let sigmas = params.propagate_uncontrolled();
        for sigma in &sigmas[1..] {
            assert_relative_eq!((sigma.matrix() - w.matrix()).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn transformed_propagation_matches_policy_form() {
        // single-step check with an explicit K: P = KΣ, M = KΣKᵀ matches Q=0
        let params = planar_params();
        let k_gain = DMatrix::from_row_slice(1, 2, &[0.4, -0.2]);
        let sigma0 = params.sigma0().matrix();
        let p0 = &k_gain * sigma0;
        let m0 = SymmetricMatrix::from_symmetric_unchecked(&k_gain * sigma0 * k_gain.transpose());
        let mut m = vec![SymmetricMatrix::zeros(1); params.horizon()];
        let mut p = vec![DMatrix::zeros(1, 2); params.horizon()];
        m[0] = m0;
        p[0] = p0;
        let transformed = params.propagate_transformed(&m, &p).unwrap();

        let mut gains = vec![DMatrix::zeros(1, 2); params.horizon()];
        gains[0] = k_gain;
        let policy =
            Policy::new(gains, vec![SymmetricMatrix::zeros(1); params.horizon()]).unwrap();
        let direct = params.propagate_policy(&policy).unwrap();
        assert_relative_eq!(
            (transformed[1].matrix() - direct[1].matrix()).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn recover_policy_by_hand() {
        // Σ = 2I, P = [1 0], M = [0.5] → K = [0.5 0], Q = [0]
        let plan = TransformedPlan {
            sigma: vec![SymmetricMatrix::scaled_identity(2, 2.0); 2],
            m: vec![SymmetricMatrix::from_diagonal(&[0.5])],
            p: vec![DMatrix::from_row_slice(1, 2, &[1.0, 0.0])],
        };
        let policy = plan.recover_policy().unwrap();
        assert_relative_eq!(policy.gain(0)[(0, 0)], 0.5, epsilon = 1e-12);
        assert_relative_eq!(policy.gain(0)[(0, 1)], 0.0, epsilon = 1e-12);
        assert_relative_eq!(policy.noise_cov(0).matrix()[(0, 0)], 0.0, epsilon = 1e-12);

        // M = [1.0] leaves Q = [0.5]
        let plan = TransformedPlan {
            m: vec![SymmetricMatrix::from_diagonal(&[1.0])],
            ..plan
        };
        let policy = plan.recover_policy().unwrap();
        assert_relative_eq!(policy.noise_cov(0).matrix()[(0, 0)], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn recover_policy_zero_plan() {
        let plan = TransformedPlan {
            sigma: vec![SymmetricMatrix::identity(2); 3],
            m: vec![SymmetricMatrix::zeros(1); 2],
            p: vec![DMatrix::zeros(1, 2); 2],
        };
        let policy = plan.recover_policy().unwrap();
        assert!(policy.is_deterministic());
        assert_relative_eq!(policy.gain(0).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn recover_policy_rejects_singular_sigma() {
        let plan = TransformedPlan {
            sigma: vec![SymmetricMatrix::from_diagonal(&[1.0, 0.0]); 2],
            m: vec![SymmetricMatrix::zeros(1)],
            p: vec![DMatrix::zeros(1, 2)],
        };
        assert!(matches!(
            plan.recover_policy(),
            Err(Error::SingularCovariance(_))
        ));
    }

    #[test]
    fn control_energy_cases() {
        let params = SystemParams::time_invariant(
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            SymmetricMatrix::zeros(2),
            SymmetricMatrix::from_diagonal(&[2.0, 1.0]),
            1,
            SymmetricMatrix::identity(2),
        )
        .unwrap();
        // tr(diag(2,1) · diag(1,3)) = 5
        let m = vec![SymmetricMatrix::from_diagonal(&[1.0, 3.0])];
        assert_relative_eq!(params.control_energy(&m).unwrap(), 5.0, epsilon = 1e-12);
        let zeros = vec![SymmetricMatrix::zeros(2)];
        assert_relative_eq!(params.control_energy(&zeros).unwrap(), 0.0, epsilon = 1e-15);

        // scalar R = 1 over two steps, M = (0.5, 1.0) → 1.5
        let params = SystemParams::time_invariant(
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
            SymmetricMatrix::zeros(2),
            SymmetricMatrix::identity(1),
            2,
            SymmetricMatrix::identity(2),
        )
        .unwrap();
        let m = vec![
            SymmetricMatrix::from_diagonal(&[0.5]),
            SymmetricMatrix::from_diagonal(&[1.0]),
        ];
        assert_relative_eq!(params.control_energy(&m).unwrap(), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn rollout_deterministic_and_degenerate() {
        let params = planar_params();
        let policy = Policy::zero(&params);
        let a = rollout(&params, &policy, 64, 42).unwrap();
        let b = rollout(&params, &policy, 64, 42).unwrap();
        assert_eq!(a.data, b.data); // bit-identical
        let c = rollout(&params, &policy, 64, 43).unwrap();
        assert_ne!(a.data, c.data);

        // no noise anywhere → every path identically zero
        let silent = SystemParams::time_invariant(
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 1, &[1.0, 1.0]),
            SymmetricMatrix::zeros(2),
            SymmetricMatrix::identity(1),
            3,
            // Σ0 must be PD to construct params; sample a tiny one and
            // check paths match its scale instead of exact zero
            SymmetricMatrix::scaled_identity(2, 1e-30),
        )
        .unwrap();
        let batch = rollout(&silent, &Policy::zero(&silent), 8, 7).unwrap();
        for s in 0..8 {
            for k in 0..=3 {
                for &v in batch.state(s, k) {
                    assert!(v.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn empirical_covariance_small_cases() {
        let params = SystemParams::time_invariant(
            DMatrix::identity(1, 1),
            DMatrix::identity(1, 1),
            SymmetricMatrix::zeros(1),
            SymmetricMatrix::identity(1),
            1,
            SymmetricMatrix::identity(1),
        )
        .unwrap();
        let batch = rollout(&params, &Policy::zero(&params), 16, 0).unwrap();
        assert!(batch.empirical_covariance(2).is_err()); // out of range

        // hand-built batch: samples (1,0) and (−1,0) → [[2,0],[0,0]]
        let batch = RolloutBatch {
            data: vec![1.0, 0.0, -1.0, 0.0],
            n_samples: 2,
            horizon: 0,
            state_dim: 2,
            seed: 0,
            deterministic_policy: true,
        };
        let cov = batch.empirical_covariance(0).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        assert_relative_eq!((cov.matrix() - expected).norm(), 0.0, epsilon = 1e-12);

        let identical = RolloutBatch {
            data: vec![3.0, 3.0, 3.0],
            n_samples: 3,
            horizon: 0,
            state_dim: 1,
            seed: 0,
            deterministic_policy: true,
        };
        assert_relative_eq!(
            identical.empirical_covariance(0).unwrap().matrix()[(0, 0)],
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn monte_carlo_matches_propagation() {
        // 1e5 samples: empirical Σ_N within 5 standard errors elementwise
        let params = planar_params();
        let policy = Policy::zero(&params);
        let n_samples = 100_000;
        let batch = rollout(&params, &policy, n_samples, 2024).unwrap();
        let predicted = params.propagate_policy(&policy).unwrap();
        let n = params.horizon();
        let emp = batch.empirical_covariance(n).unwrap();
        let sig = predicted[n].matrix();
        for i in 0..2 {
            for j in 0..2 {
                let var = (sig[(i, i)] * sig[(j, j)] + sig[(i, j)] * sig[(i, j)])
                    / n_samples as f64;
                let se = var.sqrt();
                let diff = (emp.matrix()[(i, j)] - sig[(i, j)]).abs();
                assert!(
                    diff <= 5.0 * se,
                    "entry ({i},{j}): |{}| > 5·{se}",
                    emp.matrix()[(i, j)] - sig[(i, j)]
                );
            }
        }
    }

    #[test]
    fn control_energy_matches_monte_carlo_estimate() {
        // tr(R M) accounting equals E[Σ uᵀ R u] estimated from sampled
        // states with fresh policy noise
        let params = planar_params();
        let k_gain = DMatrix::from_row_slice(1, 2, &[-0.3, 0.2]);
        let policy = Policy::new(
            vec![k_gain; 10],
            vec![SymmetricMatrix::from_diagonal(&[0.15]); 10],
        )
        .unwrap();
        let plan = TransformedPlan::from_policy(&params, &policy).unwrap();
        let exact = params.control_energy(&plan.m).unwrap();

        let n_samples = 100_000;
        let batch = rollout(&params, &policy, n_samples, 555).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(556);
        let sqrt_q = policy.noise_cov(0).sqrt_psd();
        let mut total = 0.0;
        for s in 0..n_samples {
            for k in 0..params.horizon() {
                let x = DVector::from_row_slice(batch.state(s, k));
                let noise: f64 = StandardNormal.sample(&mut rng);
                let u = policy.gain(k) * x + sqrt_q.matrix() * DVector::from_element(1, noise);
                total += (u.transpose() * params.r(k).matrix() * &u)[(0, 0)];
            }
        }
        let estimate = total / n_samples as f64;
        // generous Monte Carlo band: the summand is a χ²-like variable
        let rel = (estimate - exact).abs() / exact;
        assert!(rel < 0.05, "estimate {estimate} vs exact {exact} (rel {rel:.3})");
    }

    #[test]
    fn noise_floor_preserved() {
        // with W ⪰ wI every propagated Σ_{k+1} ⪰ wI
        let params = planar_params();
        let k_gain = DMatrix::from_row_slice(1, 2, &[-0.4, 0.3]);
        let policy = Policy::new(
            vec![k_gain; 10],
            vec![SymmetricMatrix::from_diagonal(&[0.2]); 10],
        )
        .unwrap();
        let sigmas = params.propagate_policy(&policy).unwrap();
        for sigma in &sigmas[1..] {
            assert!(sigma.min_eigenvalue() >= 0.5 - 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn prop_transform_round_trip(seed in 0u64..200) {
            // sample a random policy, lift it, propagate both ways
            let params = planar_params();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut gains = Vec::new();
            let mut noise = Vec::new();
            for _ in 0..params.horizon() {
                gains.push(DMatrix::from_fn(1, 2, |_, _| rng.random_range(-0.5..0.5)));
                noise.push(SymmetricMatrix::from_diagonal(&[rng.random_range(0.0..0.3)]));
            }
            let policy = Policy::new(gains, noise).unwrap();
            let plan = TransformedPlan::from_policy(&params, &policy).unwrap();
            let direct = params.propagate_policy(&policy).unwrap();
            let transformed = params.propagate_transformed(&plan.m, &plan.p).unwrap();
            for k in 0..=params.horizon() {
                let err = (direct[k].matrix() - transformed[k].matrix()).norm();
                prop_assert!(err <= 1e-9 * direct[k].frobenius_norm().max(1.0));
            }
            // and recovery returns the original policy where Σ is PD
            let recovered = plan.recover_policy().unwrap();
            for k in 0..params.horizon() {
                prop_assert!((recovered.gain(k) - policy.gain(k)).norm() < 1e-8);
                prop_assert!(
                    (recovered.noise_cov(k).matrix() - policy.noise_cov(k).matrix()).norm() < 1e-8
                );
            }
        }
    }
}
