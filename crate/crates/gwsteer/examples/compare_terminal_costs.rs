//! Head to head: one shape-steering run (which optimizes the terminal
//! orientation implicitly) against the orientation sweep of the
//! Wasserstein baseline.
//!
//! Run with `cargo run --example compare_terminal_costs`.

use gwsteer::baseline::{compare_gw_vs_wasserstein, theta_grid};
use gwsteer::dca::DcaConfig;
use gwsteer::gaussian::SymmetricMatrix;
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
    let sigma_r = SymmetricMatrix::from_diagonal(&[2.0, 0.5]);

    let report = compare_gw_vs_wasserstein(
        &params,
        &sigma_r,
        1.0,
        &theta_grid(64),
        &DcaConfig::default(),
    )
    .unwrap();

    if report.comparable {
        println!(
            "shape-steering run:   theta_gw = {:.4} rad, energy {:.4}, GGW^2 {:.4}",
            report.theta_gw.unwrap(),
            report.gw_energy,
            report.gw_ggw_squared
        );
        println!(
            "orientation sweep:    theta*  = {:.4} rad, W_opt(theta*) = {:.4}",
            report.theta_star.unwrap(),
            report.w_opt_at_star.unwrap()
        );
        println!(
            "agreement: |theta_gw - theta*| = {:.4} rad (mod pi)",
            report.angle_gap.unwrap()
        );
        println!(
            "cost accounting: {} optimization problem vs {} sweep solves",
            report.gw_problems_solved, report.sweep_problems_solved
        );
    } else {
        println!(
            "incomparable: {}",
            report.note.as_deref().unwrap_or("no orientation defined")
        );
    }
}
