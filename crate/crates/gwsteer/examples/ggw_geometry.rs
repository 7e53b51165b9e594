//! Shape distances on rotated covariances: the Gromov-Wasserstein
//! discrepancy ignores orientation, the Bures-Wasserstein distance does
//! not.
//!
//! Run with `cargo run --example ggw_geometry`.

use gwsteer::gaussian::{
    ggw_squared, rotate_covariance, wasserstein2_squared, SymmetricMatrix,
};

fn main() {
    let shape = SymmetricMatrix::from_diagonal(&[2.0, 0.5]);
    let reference = SymmetricMatrix::from_diagonal(&[2.0, 0.5]);

    println!("target spectrum (2, 0.5); rotating the candidate by theta:");
    println!("{:>8} {:>14} {:>14}", "theta", "GGW^2", "W^2");
    for i in 0..9 {
        let theta = std::f64::consts::PI * i as f64 / 8.0;
        let rotated = rotate_covariance(&shape, theta).unwrap();
        let ggw = ggw_squared(&rotated, &reference).unwrap();
        let w2 = wasserstein2_squared(&rotated, &reference).unwrap();
        println!("{theta:>8.4} {ggw:>14.10} {w2:>14.10}");
    }

    println!();
    println!("dimension padding: a line segment in 1-D vs its planar embedding");
    let line_1d = SymmetricMatrix::from_diagonal(&[10.0]);
    let line_2d = SymmetricMatrix::from_diagonal(&[10.0, 0.0]);
    println!(
        "GGW^2(diag(10) in 1-D, diag(10, 0) in 2-D) = {}",
        ggw_squared(&line_1d, &line_2d).unwrap()
    );
}
