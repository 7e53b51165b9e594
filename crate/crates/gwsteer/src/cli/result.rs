//! Result file formats: versioned JSON documents plus CSV companions for
//! bulk numeric tables. JSON numbers are written in shortest round-trip
//! form, so reading a result back reproduces the solved values exactly.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::gaussian::SymmetricMatrix;
use crate::system::{Policy, RolloutBatch, SystemParams};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// One policy step: gain and injection covariance, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyStep {
    pub k: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
}

/// Wall-clock accounting. Excluded from any determinism comparison of
/// result files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timings {
    pub total_s: f64,
}

/// Output of `solve` and `uncontrolled`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultFile {
    pub schema_version: u32,
    pub command: String,
    pub inputs_hash: String,
    pub lambda: f64,
    pub converged: bool,
    pub iterations: usize,
    pub objective_history: Vec<f64>,
    pub energy: f64,
    pub ggw_squared: f64,
    pub theta_gw: Option<f64>,
    pub policy: Vec<PolicyStep>,
    /// `Σ_0 .. Σ_N`, row-major per step.
    pub covariance_trajectory: Vec<Vec<Vec<f64>>>,
    pub warnings: Vec<String>,
    pub timings: Timings,
}

/// Output of `rollout`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RolloutSummary {
    pub schema_version: u32,
    pub command: String,
    pub inputs_hash: String,
    pub n_samples: usize,
    pub seed: u64,
    pub deterministic_policy: bool,
    pub predicted_sigma_n: Vec<Vec<f64>>,
    pub empirical_sigma_n: Vec<Vec<f64>>,
    /// Largest elementwise deviation between the two.
    pub max_abs_deviation: f64,
    /// Five standard errors of the worst entry's sampling noise.
    pub five_standard_errors: f64,
    pub within_bound: bool,
    pub timings: Timings,
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::invalid_input(format!("{what}: empty matrix")));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::invalid_input(format!("{what}: ragged rows")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub fn policy_to_json(policy: &Policy) -> Vec<PolicyStep> {
    (0..policy.horizon())
        .map(|k| PolicyStep {
            k: matrix_rows(policy.gain(k)),
            q: matrix_rows(policy.noise_cov(k).matrix()),
        })
        .collect()
}

pub fn policy_from_json(steps: &[PolicyStep]) -> Result<Policy> {
    let mut gains = Vec::with_capacity(steps.len());
    let mut noise = Vec::with_capacity(steps.len());
    for (i, step) in steps.iter().enumerate() {
        gains.push(rows_to_matrix(&step.k, &format!("policy[{i}].k"))?);
        noise.push(SymmetricMatrix::new(rows_to_matrix(
            &step.q,
            &format!("policy[{i}].q"),
        )?)?);
    }
    Policy::new(gains, noise)
}

pub fn trajectory_rows(sigmas: &[SymmetricMatrix]) -> Vec<Vec<Vec<f64>>> {
    sigmas.iter().map(|s| matrix_rows(s.matrix())).collect()
}

/// Pretty JSON with a trailing newline; deterministic for identical
/// contents.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_result(path: &Path) -> Result<ResultFile> {
    let text = std::fs::read_to_string(path)?;
    let result: ResultFile = serde_json::from_str(&text)?;
    if result.schema_version != SCHEMA_VERSION {
        return Err(Error::invalid_input(format!(
            "result file has schema version {}, this build reads {SCHEMA_VERSION}",
            result.schema_version
        )));
    }
    Ok(result)
}

/// One row per step: `k` followed by the row-major entries of `Σ_k`.
pub fn write_trajectory_csv(path: &Path, sigmas: &[SymmetricMatrix]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = csv::Writer::from_writer(file);
    let n = sigmas.first().map(|s| s.dim()).unwrap_or(0);
    let mut header = vec!["k".to_string()];
    for i in 0..n {
        for j in 0..n {
            header.push(format!("sigma_{i}_{j}"));
        }
    }
    w.write_record(&header).map_err(csv_err)?;
    for (k, sigma) in sigmas.iter().enumerate() {
        let mut record = vec![k.to_string()];
        for i in 0..n {
            for j in 0..n {
                record.push(format!("{}", sigma.matrix()[(i, j)]));
            }
        }
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format sample paths: `sample, k, x_0, ..`.
pub fn write_paths_csv(path: &Path, batch: &RolloutBatch) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    let mut header = String::from("sample,k");
    for i in 0..batch.state_dim() {
        header.push_str(&format!(",x_{i}"));
    }
    writeln!(out, "{header}")?;
    for s in 0..batch.n_samples() {
        for k in 0..=batch.horizon() {
            let mut line = format!("{s},{k}");
            for v in batch.state(s, k) {
                line.push_str(&format!(",{v}"));
            }
            writeln!(out, "{line}")?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Empirical-vs-predicted terminal comparison for a batch.
pub fn rollout_summary(
    params: &SystemParams,
    policy: &Policy,
    batch: &RolloutBatch,
    inputs_hash: &str,
    total_s: f64,
) -> Result<RolloutSummary> {
    let predicted = params.propagate_policy(policy)?;
    let sigma_n = predicted.last().expect("horizon >= 1");
    let empirical = batch.empirical_covariance(batch.horizon())?;
    let n = sigma_n.dim();
    let mut max_dev: f64 = 0.0;
    let mut bound: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dev = (empirical.matrix()[(i, j)] - sigma_n.matrix()[(i, j)]).abs();
            let var = (sigma_n.matrix()[(i, i)] * sigma_n.matrix()[(j, j)]
                + sigma_n.matrix()[(i, j)].powi(2))
                / batch.n_samples() as f64;
            if dev > max_dev {
                max_dev = dev;
                bound = 5.0 * var.sqrt();
            }
        }
    }
    Ok(RolloutSummary {
        schema_version: SCHEMA_VERSION,
        command: "rollout".into(),
        inputs_hash: inputs_hash.to_string(),
        n_samples: batch.n_samples(),
        seed: batch.seed(),
        deterministic_policy: batch.deterministic_policy(),
        predicted_sigma_n: matrix_rows(sigma_n.matrix()),
        empirical_sigma_n: matrix_rows(empirical.matrix()),
        max_abs_deviation: max_dev,
        five_standard_errors: bound,
        within_bound: max_dev <= bound,
        timings: Timings { total_s },
    })
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid_input(format!("CSV write failed: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_json_round_trip() {
        let policy = Policy::new(
            vec![DMatrix::from_row_slice(1, 2, &[0.25, -0.5]); 3],
            vec![SymmetricMatrix::from_diagonal(&[0.1]); 3],
        )
        .unwrap();
        let json = policy_to_json(&policy);
        let back = policy_from_json(&json).unwrap();
        assert_eq!(back.horizon(), 3);
        assert_eq!(back.gain(0)[(0, 1)], -0.5);
        assert_eq!(back.noise_cov(2).matrix()[(0, 0)], 0.1);
    }

    #[test]
    fn json_numbers_round_trip_exactly() {
        let value = 0.1 + 0.2; // not representable prettily
        let result = ResultFile {
            schema_version: SCHEMA_VERSION,
            command: "solve".into(),
            inputs_hash: "x".into(),
            lambda: value,
            converged: true,
            iterations: 1,
            objective_history: vec![value * 3.0],
            energy: value,
            ggw_squared: value,
            theta_gw: Some(std::f64::consts::PI / value),
            policy: vec![],
            covariance_trajectory: vec![],
            warnings: vec![],
            timings: Timings { total_s: 0.0 },
        };
        let text = serde_json::to_string(&result).unwrap();
        let back: ResultFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.lambda.to_bits(), result.lambda.to_bits());
        assert_eq!(
            back.theta_gw.unwrap().to_bits(),
            result.theta_gw.unwrap().to_bits()
        );
        assert_eq!(
            back.objective_history[0].to_bits(),
            result.objective_history[0].to_bits()
        );
    }
}
