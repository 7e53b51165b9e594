//! Covariance steering with a Gromov-Wasserstein shape cost.
//!
//! This crate steers the state covariance of a discrete-time linear Gaussian
//! system
//!
//! ```text
//! x_{k+1} = A_k x_k + B_k u_k + w_k,   x_0 ~ N(0, Σ_0),   w_k ~ N(0, W_k)
//! ```
//!
//! under a stochastic linear policy `u_k(x) = N(K_k x, Q_k)`, so that the
//! terminal covariance Σ_N acquires a target *shape* Σ_r. The terminal cost
//! is the Gaussian Gromov-Wasserstein discrepancy
//!
//! ```text
//! GGW²(Σ_N, Σ_r) = 4 (tr Σ_N − tr Σ_r)² + 8 ‖D_N − D_r‖_F²
//! ```
//!
//! (`D` = descending eigenvalues, zero-padded across dimensions), which is
//! invariant under rotations of either covariance and therefore measures the
//! shape mismatch alone. The total objective `λ·energy + GGW²` is a
//! difference of convex functions; it is minimized by iteratively
//! linearizing the concave part and solving the resulting semidefinite
//! program ([`dca::solve_gw_steering`]).
//!
//! A classical Wasserstein terminal-cost solver ([`baseline`]) is included
//! for comparison: it is orientation-sensitive, so recovering the best
//! rotation of the target requires a sweep of solves, where the
//! Gromov-Wasserstein formulation needs a single run.
//!
//! Entry points:
//! - [`gaussian`]: covariance geometry (spectra, GGW, Bures-Wasserstein,
//!   rotations, trace maximization over the orthogonal group).
//! - [`system`]: covariance propagation, policy transforms, Monte Carlo
//!   rollouts.
//! - [`subproblem`]: the conic-program modeling layer and solver backend.
//! - [`dca`]: the outer difference-of-convex iteration.
//! - [`baseline`]: Wasserstein baseline and the λ/θ experiment sweeps.
//! - [`cli`]: problem/result file formats and the `gwsteer` subcommands.
//!
//! The `examples/` directory of this crate holds one runnable example per
//! capability; see the README for the catalogue.

pub mod baseline;
pub mod cli;
pub mod dca;
mod error;
pub mod gaussian;
pub mod subproblem;
pub mod system;

pub use error::{Error, Result};
