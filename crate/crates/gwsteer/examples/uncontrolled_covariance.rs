//! Covariance growth of the uncontrolled benchmark system and the shape
//! discrepancy of its terminal distribution.
//!
//! Run with `cargo run --example uncontrolled_covariance`.

use gwsteer::gaussian::{ggw_squared, SymmetricMatrix};
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

    let sigmas = params.propagate_uncontrolled();
    println!("{:>3} {:>10} {:>10} {:>10}", "k", "s_00", "s_01", "s_11");
    for (k, sigma) in sigmas.iter().enumerate() {
        let m = sigma.matrix();
        println!(
            "{k:>3} {:>10.4} {:>10.4} {:>10.4}",
            m[(0, 0)],
            m[(0, 1)],
            m[(1, 1)]
        );
    }

    let target = SymmetricMatrix::from_diagonal(&[2.0, 0.5]);
    let terminal = sigmas.last().unwrap();
    println!();
    println!(
        "terminal eigenvalues: {:?}",
        terminal.spectrum().eigenvalues().as_slice()
    );
    println!(
        "GGW^2 against diag(2, 0.5): {:.2}",
        ggw_squared(terminal, &target).unwrap()
    );
}
