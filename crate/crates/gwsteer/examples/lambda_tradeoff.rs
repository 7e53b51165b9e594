//! The energy/shape trade-off: sweeping the scalarization weight λ from
//! shape-dominated to energy-dominated regimes.
//!
//! Run with `cargo run --example lambda_tradeoff`.

use gwsteer::baseline::sweep_lambda;
use gwsteer::dca::DcaConfig;
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

    let lambdas = [1.0, 10.0, 100.0, 1000.0, 10000.0];
    let table = sweep_lambda(&params, &target, &lambdas, &DcaConfig::default()).unwrap();

    println!("uncontrolled GGW^2 would be 6711.44");
    println!("{:>10} {:>12} {:>14} {:>12}", "lambda", "energy", "GGW^2", "status");
    for row in &table.rows {
        println!(
            "{:>10} {:>12.4} {:>14.4} {:>12}",
            row.parameter, row.energy, row.terminal_cost, row.status
        );
    }
    for warning in &table.warnings {
        println!("warning: {warning}");
    }
    let mut csv = Vec::new();
    table.write_csv(&mut csv).unwrap();
    print!("\nCSV form:\n{}", String::from_utf8(csv).unwrap());
}
