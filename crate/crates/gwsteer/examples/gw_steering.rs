//! Steer the benchmark system toward the shape diag(2, 0.5): one run of
//! the difference-of-convex solver, which picks the terminal orientation
//! on its own.
//!
//! Run with `cargo run --example gw_steering`.

use gwsteer::dca::{solve_gw_steering, DcaConfig};
use gwsteer::gaussian::{SymmetricMatrix, TargetShape};
use gwsteer::system::SystemParams;
use nalgebra::DMatrix;

fn main() {
    let params = SystemParams::time_invariant(
        DMatrix::from_row_slice(2, 2, &[1.0, 0.1, -0.3, 1.0]),
        DMatrix::from_row_slice(2, 1, &[0.7, 0.4]),
        SymmetricMatrix::scaled_identity(2, 0.5),
        SymmetricMatrix::identity(1),
        10,
        SymmetricMatrix::scaled_identity(2, 3.0),
    )
    .unwrap();
    let target = TargetShape::new(SymmetricMatrix::from_diagonal(&[2.0, 0.5])).unwrap();

    let result = solve_gw_steering(&params, &target, 1.0, &DcaConfig::default()).unwrap();

    println!("converged: {} in {} iterations", result.converged, result.iterations);
    println!("objective history:");
    for (i, j) in result.objective_history.iter().enumerate() {
        println!("  iter {i:>2}: J = {j:.6}");
    }
    let terminal_state = result.terminal_state();
    let terminal = terminal_state.cov();
    println!();
    println!("terminal covariance: {:?}", terminal.matrix().as_slice());
    println!(
        "terminal eigenvalues: {:?} (target spectrum 2, 0.5)",
        terminal.spectrum().eigenvalues().as_slice()
    );
    println!(
        "orientation theta_gw = {:.4} rad",
        result.theta_gw.unwrap_or(f64::NAN)
    );
    println!("control energy = {:.4}", result.energy);
    println!("shape cost GGW^2 = {:.6}", result.ggw_squared);
    println!(
        "policy is deterministic: max |Q_k| = {:.2e}",
        result.policy.max_noise_norm()
    );
}
