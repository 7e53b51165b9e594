//! Sample trajectories under the optimal policy and check that the
//! empirical terminal covariance matches the propagated prediction.
//!
//! Run with `cargo run --example monte_carlo_rollout`.

use gwsteer::dca::{solve_gw_steering, DcaConfig};
use gwsteer::gaussian::{SymmetricMatrix, TargetShape};
use gwsteer::system::{rollout, SystemParams};
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
    println!(
        "policy solved: theta_gw = {:.4}, energy = {:.4}",
        result.theta_gw.unwrap_or(f64::NAN),
        result.energy
    );

    let n_samples = 100_000;
    let batch = rollout(&params, &result.policy, n_samples, 7).unwrap();
    let empirical = batch.empirical_covariance(params.horizon()).unwrap();
    let predicted = result.plan.terminal();

    println!("predicted terminal covariance: {:?}", predicted.matrix().as_slice());
    println!("empirical  terminal covariance: {:?}", empirical.matrix().as_slice());
    let deviation = (empirical.matrix() - predicted.matrix()).norm();
    println!("Frobenius deviation over {n_samples} samples: {deviation:.2e}");

    // a few sample paths, as coordinates over time
    println!();
    println!("first three sample paths (x_0, x_1 per step):");
    for s in 0..3 {
        let path: Vec<String> = (0..=params.horizon())
            .map(|k| {
                let x = batch.state(s, k);
                format!("({:+.2}, {:+.2})", x[0], x[1])
            })
            .collect();
        println!("  sample {s}: {}", path.join(" "));
    }
}
