//! Align the terminal distribution to a line: the target covariance lives
//! on a 1-D subspace (rank one), something an orientation-pinned terminal
//! cost cannot express without fixing the line's direction in advance.
//!
//! Run with `cargo run --example line_alignment`.

use gwsteer::dca::{solve_gw_steering, DcaConfig};
use gwsteer::gaussian::{ggw_squared, SymmetricMatrix, TargetShape};
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
    // variance 10 along a line, zero across it
    let target = TargetShape::new(SymmetricMatrix::from_diagonal(&[10.0, 0.0])).unwrap();

    let uncontrolled = params.propagate_uncontrolled();
    let before = ggw_squared(uncontrolled.last().unwrap(), target.covariance()).unwrap();

    let result = solve_gw_steering(&params, &target, 1.0, &DcaConfig::default()).unwrap();
    let terminal = result.plan.terminal();

    println!("uncontrolled GGW^2 vs the line: {before:.2}");
    println!(
        "steered     GGW^2 vs the line: {:.4} ({} iterations, energy {:.3})",
        result.ggw_squared, result.iterations, result.energy
    );
    println!(
        "terminal eigenvalues: {:?} (the small one is floored by the process noise)",
        terminal.spectrum().eigenvalues().as_slice()
    );
    println!(
        "line direction theta = {:.4} rad",
        result.theta_gw.unwrap_or(f64::NAN)
    );
}
