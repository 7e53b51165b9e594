//! The five subcommands. Each is a pure function of (problem file, flags,
//! seed): identical inputs produce byte-identical outputs apart from the
//! `timings` field.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::baseline::{
    compare_gw_vs_wasserstein, sweep_lambda, sweep_theta, theta_grid, SweepTable,
};
use crate::dca::solve_gw_steering;
use crate::gaussian::principal_angle;
use crate::system::{rollout, Policy};
use crate::{Error, Result};

use super::problem::load_problem;
use super::result::{
    policy_from_json, policy_to_json, read_result, rollout_summary, trajectory_rows, write_json,
    write_paths_csv, write_trajectory_csv, ResultFile, Timings, SCHEMA_VERSION,
};

fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

/// Run the shape-steering solver on a problem file. Writes `result.json`
/// and `covariance_trajectory.csv` into `out` and returns the JSON path.
pub fn cmd_solve(problem_path: &Path, lambda_override: Option<f64>, out: &Path) -> Result<PathBuf> {
    let t0 = Instant::now();
    let problem = load_problem(problem_path)?;
    let lambda = match lambda_override {
        Some(l) if l > 0.0 && l.is_finite() => l,
        Some(l) => {
            return Err(Error::invalid_input(format!(
                "--lambda must be positive and finite, got {l}"
            )))
        }
        None => problem.lambda,
    };
    let result = solve_gw_steering(&problem.params, &problem.target, lambda, &problem.dca)?;

    let mut warnings = result.warnings.clone();
    if !result.converged {
        warnings.push(format!(
            "iteration cap {} reached before the stopping rule fired",
            problem.dca.max_iters
        ));
    }
    ensure_out_dir(out)?;
    let file = ResultFile {
        schema_version: SCHEMA_VERSION,
        command: "solve".into(),
        inputs_hash: problem.inputs_hash.clone(),
        lambda,
        converged: result.converged,
        iterations: result.iterations,
        objective_history: result.objective_history.clone(),
        energy: result.energy,
        ggw_squared: result.ggw_squared,
        theta_gw: result.theta_gw,
        policy: policy_to_json(&result.policy),
        covariance_trajectory: trajectory_rows(&result.plan.sigma),
        warnings,
        timings: Timings {
            total_s: t0.elapsed().as_secs_f64(),
        },
    };
    let json_path = out.join("result.json");
    write_json(&json_path, &file)?;
    write_trajectory_csv(&out.join("covariance_trajectory.csv"), &result.plan.sigma)?;
    println!(
        "solve: lambda={lambda} energy={:.6} ggw_squared={:.6} theta_gw={} converged={} ({} iterations)",
        file.energy,
        file.ggw_squared,
        file.theta_gw
            .map_or("n/a".into(), |t| format!("{t:.4}")),
        file.converged,
        file.iterations,
    );
    println!("wrote {}", json_path.display());
    Ok(json_path)
}

/// Propagate the uncontrolled system and report the shape discrepancy of
/// its terminal covariance against the target.
pub fn cmd_uncontrolled(problem_path: &Path, out: &Path) -> Result<PathBuf> {
    let t0 = Instant::now();
    let problem = load_problem(problem_path)?;
    let sigmas = problem.params.propagate_uncontrolled();
    let terminal = sigmas.last().expect("horizon >= 1").clip_psd();
    let ggw = crate::gaussian::ggw_squared(&terminal, problem.target.covariance())?;
    let theta = if problem.params.state_dim() == 2 {
        principal_angle(&terminal).ok()
    } else {
        None
    };
    let policy = Policy::zero(&problem.params);

    ensure_out_dir(out)?;
    let file = ResultFile {
        schema_version: SCHEMA_VERSION,
        command: "uncontrolled".into(),
        inputs_hash: problem.inputs_hash.clone(),
        lambda: problem.lambda,
        converged: true,
        iterations: 0,
        objective_history: vec![],
        energy: 0.0,
        ggw_squared: ggw,
        theta_gw: theta,
        policy: policy_to_json(&policy),
        covariance_trajectory: trajectory_rows(&sigmas),
        warnings: vec![],
        timings: Timings {
            total_s: t0.elapsed().as_secs_f64(),
        },
    };
    let json_path = out.join("result.json");
    write_json(&json_path, &file)?;
    write_trajectory_csv(&out.join("covariance_trajectory.csv"), &sigmas)?;
    println!(
        "uncontrolled: ggw_squared={:.6} vs target over {} steps",
        ggw,
        problem.params.horizon()
    );
    println!("wrote {}", json_path.display());
    Ok(json_path)
}

/// Sample trajectories under a solved policy (or the zero policy) and
/// compare the empirical terminal covariance against the propagated one.
pub fn cmd_rollout(
    problem_path: &Path,
    samples: usize,
    seed_override: Option<u64>,
    policy_path: Option<&Path>,
    uncontrolled: bool,
    out: &Path,
) -> Result<PathBuf> {
    let t0 = Instant::now();
    let problem = load_problem(problem_path)?;
    let policy = match (policy_path, uncontrolled) {
        (Some(path), false) => {
            let result = read_result(path)?;
            policy_from_json(&result.policy)?
        }
        (None, true) => Policy::zero(&problem.params),
        _ => {
            return Err(Error::invalid_input(
                "exactly one of --policy <result.json> or --uncontrolled is required",
            ))
        }
    };
    let seed = seed_override.unwrap_or(problem.seed);
    let batch = rollout(&problem.params, &policy, samples, seed)?;

    ensure_out_dir(out)?;
    let summary = rollout_summary(
        &problem.params,
        &policy,
        &batch,
        &problem.inputs_hash,
        t0.elapsed().as_secs_f64(),
    )?;
    write_paths_csv(&out.join("paths.csv"), &batch)?;
    let json_path = out.join("rollout_summary.json");
    write_json(&json_path, &summary)?;
    println!(
        "rollout: {} samples, seed {}, max |empirical - predicted| = {:.4e} (5se bound {:.4e})",
        samples, seed, summary.max_abs_deviation, summary.five_standard_errors
    );
    println!("wrote {}", json_path.display());
    Ok(json_path)
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepMode {
    Lambda,
    Theta,
}

/// Run a λ- or θ-sweep and write the table as CSV. Per-row failures are
/// recorded in the table; the command only fails when every row failed.
pub fn cmd_sweep(
    problem_path: &Path,
    mode: SweepMode,
    values: Option<&str>,
    grid: Option<usize>,
    out: &Path,
) -> Result<PathBuf> {
    let problem = load_problem(problem_path)?;
    let table: SweepTable = match mode {
        SweepMode::Lambda => {
            let values = values.ok_or_else(|| {
                Error::invalid_input("--values \"l1,l2,...\" is required for --mode lambda")
            })?;
            let lambdas = parse_value_list(values)?;
            sweep_lambda(&problem.params, &problem.target, &lambdas, &problem.dca)?
        }
        SweepMode::Theta => {
            let angles = match values {
                Some(list) => parse_value_list(list)?,
                None => theta_grid(grid.unwrap_or(64)),
            };
            sweep_theta(
                &problem.params,
                problem.target.covariance(),
                1e-3,
                &angles,
                &problem.dca.backend,
            )?
        }
    };
    for warning in &table.warnings {
        log::warn!("{warning}");
    }
    if table.all_failed() {
        return Err(Error::SolverFailure("every sweep row failed".into()));
    }
    ensure_out_dir(out)?;
    let name = match mode {
        SweepMode::Lambda => "sweep_lambda.csv",
        SweepMode::Theta => "sweep_theta.csv",
    };
    let csv_path = out.join(name);
    let file = std::fs::File::create(&csv_path)?;
    table.write_csv(file)?;
    println!(
        "sweep: {} rows over {}, {} warnings",
        table.rows.len(),
        table.parameter_name,
        table.warnings.len()
    );
    println!("wrote {}", csv_path.display());
    Ok(csv_path)
}

fn parse_value_list(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid_input(format!("bad numeric value `{tok}`")))
        })
        .collect()
}

/// Versioned wrapper around the comparison report.
#[derive(serde::Serialize, serde::Deserialize)]
pub struct CompareFile {
    pub schema_version: u32,
    pub command: String,
    pub inputs_hash: String,
    pub lambda: f64,
    #[serde(flatten)]
    pub report: crate::baseline::ComparisonReport,
    pub timings: Timings,
}

/// Run the single shape-steering solve against the orientation sweep and
/// write the comparison report.
pub fn cmd_compare(problem_path: &Path, grid: usize, out: &Path) -> Result<PathBuf> {
    let t0 = Instant::now();
    let problem = load_problem(problem_path)?;
    let report = compare_gw_vs_wasserstein(
        &problem.params,
        problem.target.covariance(),
        problem.lambda,
        &theta_grid(grid),
        &problem.dca,
    )?;
    ensure_out_dir(out)?;
    let json_path = out.join("compare.json");
    write_json(
        &json_path,
        &CompareFile {
            schema_version: SCHEMA_VERSION,
            command: "compare".into(),
            inputs_hash: problem.inputs_hash.clone(),
            lambda: problem.lambda,
            report: report.clone(),
            timings: Timings {
                total_s: t0.elapsed().as_secs_f64(),
            },
        },
    )?;
    match (&report.theta_gw, &report.theta_star) {
        (Some(gw), Some(star)) if report.comparable => println!(
            "compare: theta_gw={gw:.4} theta_star={star:.4} gap={:.4} ({} solve vs {} sweep solves)",
            report.angle_gap.unwrap_or(f64::NAN),
            report.gw_problems_solved,
            report.sweep_problems_solved,
        ),
        _ => println!(
            "compare: incomparable ({})",
            report.note.as_deref().unwrap_or("no orientation defined")
        ),
    }
    println!("wrote {}", json_path.display());
    Ok(json_path)
}

