//! Problem file loading.
//!
//! Problems are JSON documents:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "system": {
//!     "A": [[1.0, 0.1], [-0.3, 1.0]],
//!     "B": [[0.7], [0.4]],
//!     "W": [[0.5, 0.0], [0.0, 0.5]],
//!     "R": 1.0,
//!     "N": 10,
//!     "sigma0": [[3.0, 0.0], [0.0, 3.0]]
//!   },
//!   "target": { "sigma_r": [[2.0, 0.0], [0.0, 0.5]] },
//!   "solver": {
//!     "lambda": 1.0,
//!     "dca": { "max_iters": 50, "tol_abs": 1e-7, "tol_rel": 1e-6,
//!              "init": "uncontrolled_spectrum" },
//!     "backend": { "feas_tol": 1e-8, "gap_tol": 1e-8, "max_iters": 200 }
//!   },
//!   "seed": 0
//! }
//! ```
//!
//! `A`, `B`, `W`, `R` are either a single matrix (broadcast over the
//! horizon) or a length-`N` list of matrices; bare scalars promote to 1×1
//! matrices. All distributions are zero-mean; optional `mean` fields are
//! accepted but must be identically zero. Malformed documents are rejected
//! with the JSON path of the offending value.

use std::path::Path;

use nalgebra::DMatrix;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::dca::{DcaConfig, InitStrategy};
use crate::gaussian::{SymmetricMatrix, TargetShape};
use crate::subproblem::BackendSettings;
use crate::system::SystemParams;
use crate::{Error, Result};

/// A fully validated problem instance.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub params: SystemParams,
    pub target: TargetShape,
    pub lambda: f64,
    pub dca: DcaConfig,
    pub seed: u64,
    /// SHA-256 of the raw problem file bytes.
    pub inputs_hash: String,
}

fn format_err(path: &str, message: impl Into<String>) -> Error {
    Error::ProblemFormat {
        path: path.to_string(),
        message: message.into(),
    }
}

fn get<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| format_err(&format!("{path}.{key}"), "missing required field"))
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a serde_json::Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| format_err(path, "expected an object"))
}

fn check_keys(v: &Value, allowed: &[&str], path: &str) -> Result<()> {
    for key in as_object(v, path)?.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(format_err(
                &format!("{path}.{key}"),
                format!("unknown field (expected one of: {})", allowed.join(", ")),
            ));
        }
    }
    Ok(())
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| format_err(path, "expected a number"))?;
    if !x.is_finite() {
        return Err(format_err(path, "expected a finite number"));
    }
    Ok(x)
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| format_err(path, "expected a non-negative integer"))
}

/// A scalar promotes to 1×1; otherwise a rectangular array of rows.
fn as_matrix(v: &Value, path: &str) -> Result<DMatrix<f64>> {
    if v.is_number() {
        return Ok(DMatrix::from_element(1, 1, as_f64(v, path)?));
    }
    let rows = v
        .as_array()
        .ok_or_else(|| format_err(path, "expected a matrix (array of rows) or a scalar"))?;
    if rows.is_empty() {
        return Err(format_err(path, "matrix has no rows"));
    }
    let mut data: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let row_path = format!("{path}[{i}]");
        let entries = row
            .as_array()
            .ok_or_else(|| format_err(&row_path, "expected an array row"))?;
        let mut parsed = Vec::with_capacity(entries.len());
        for (j, e) in entries.iter().enumerate() {
            parsed.push(as_f64(e, &format!("{row_path}[{j}]"))?);
        }
        data.push(parsed);
    }
    let ncols = data[0].len();
    if ncols == 0 {
        return Err(format_err(&format!("{path}[0]"), "row has no entries"));
    }
    for (i, row) in data.iter().enumerate() {
        if row.len() != ncols {
            return Err(format_err(
                &format!("{path}[{i}]"),
                format!("ragged rows: row {i} has {} entries, expected {ncols}", row.len()),
            ));
        }
    }
    Ok(DMatrix::from_fn(data.len(), ncols, |i, j| data[i][j]))
}

/// A single matrix broadcast over the horizon, or a length-`n` list of
/// matrices (each possibly a bare scalar).
fn as_matrix_seq(v: &Value, n: usize, path: &str) -> Result<Vec<DMatrix<f64>>> {
    // list-of-matrices iff the value is an array whose first element is an
    // array-of-arrays or a scalar
    let per_step = match v.as_array() {
        Some(items) if !items.is_empty() => match &items[0] {
            Value::Number(_) => true,
            Value::Array(inner) => inner.first().map(Value::is_array).unwrap_or(false),
            _ => false,
        },
        _ => false,
    };
    if per_step {
        let items = v.as_array().expect("checked above");
        if items.len() != n {
            return Err(format_err(
                path,
                format!("expected {n} matrices (one per step), got {}", items.len()),
            ));
        }
        items
            .iter()
            .enumerate()
            .map(|(k, item)| as_matrix(item, &format!("{path}[{k}]")))
            .collect()
    } else {
        Ok(vec![as_matrix(v, path)?; n])
    }
}

fn as_symmetric(m: DMatrix<f64>, path: &str) -> Result<SymmetricMatrix> {
    if m.nrows() != m.ncols() {
        return Err(format_err(
            path,
            format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols()),
        ));
    }
    let asym = (&m - m.transpose()).norm();
    if asym > 1e-9 * m.norm().max(1.0) {
        return Err(format_err(path, "matrix is not symmetric"));
    }
    SymmetricMatrix::new(m).map_err(|e| format_err(path, e.to_string()))
}

fn require_zero_mean(v: Option<&Value>, path: &str) -> Result<()> {
    let Some(v) = v else { return Ok(()) };
    let entries = v
        .as_array()
        .ok_or_else(|| format_err(path, "expected an array"))?;
    for (i, e) in entries.iter().enumerate() {
        if as_f64(e, &format!("{path}[{i}]"))? != 0.0 {
            return Err(format_err(
                &format!("{path}[{i}]"),
                "only zero-mean distributions are supported",
            ));
        }
    }
    Ok(())
}

fn parse_init(v: &Value, path: &str) -> Result<InitStrategy> {
    if let Some(name) = v.as_str() {
        return match name {
            "uncontrolled_spectrum" => Ok(InitStrategy::UncontrolledSpectrum),
            "identity" => Ok(InitStrategy::Identity),
            other => Err(format_err(
                path,
                format!(
                    "unknown strategy `{other}` (expected uncontrolled_spectrum, identity, \
                     or {{\"given\": [[...]]}})"
                ),
            )),
        };
    }
    check_keys(v, &["given"], path)?;
    let m = as_matrix(get(v, "given", path)?, &format!("{path}.given"))?;
    Ok(InitStrategy::Given(m))
}

/// Parse and validate a problem document.
pub fn parse_problem(text: &str) -> Result<LoadedProblem> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::ProblemFormat {
        path: "<document>".into(),
        message: e.to_string(), // serde_json includes line/column
    })?;
    check_keys(&doc, &["schema_version", "system", "target", "solver", "seed"], "$")?;

    if let Some(version) = doc.get("schema_version") {
        let v = as_usize(version, "$.schema_version")?;
        if v != 1 {
            return Err(format_err(
                "$.schema_version",
                format!("unsupported schema version {v} (this build reads version 1)"),
            ));
        }
    }

    let system = get(&doc, "system", "$")?;
    check_keys(
        system,
        &["A", "B", "W", "R", "N", "sigma0", "mean0"],
        "$.system",
    )?;
    let n = as_usize(get(system, "N", "$.system")?, "$.system.N")?;
    if n == 0 {
        return Err(format_err("$.system.N", "horizon must be positive"));
    }
    let a = as_matrix_seq(get(system, "A", "$.system")?, n, "$.system.A")?;
    let b = as_matrix_seq(get(system, "B", "$.system")?, n, "$.system.B")?;
    let w_raw = as_matrix_seq(get(system, "W", "$.system")?, n, "$.system.W")?;
    let r_raw = as_matrix_seq(get(system, "R", "$.system")?, n, "$.system.R")?;
    let sigma0 = as_symmetric(
        as_matrix(get(system, "sigma0", "$.system")?, "$.system.sigma0")?,
        "$.system.sigma0",
    )?;
    require_zero_mean(system.get("mean0"), "$.system.mean0")?;

    let mut w = Vec::with_capacity(n);
    for (k, m) in w_raw.into_iter().enumerate() {
        w.push(as_symmetric(m, &format!("$.system.W[{k}]"))?);
    }
    let mut r = Vec::with_capacity(n);
    for (k, m) in r_raw.into_iter().enumerate() {
        r.push(as_symmetric(m, &format!("$.system.R[{k}]"))?);
    }
    let params = SystemParams::new(a, b, w, r, n, sigma0)
        .map_err(|e| format_err("$.system", e.to_string()))?;

    let target_doc = get(&doc, "target", "$")?;
    check_keys(target_doc, &["sigma_r", "dim", "mean"], "$.target")?;
    let sigma_r = as_symmetric(
        as_matrix(get(target_doc, "sigma_r", "$.target")?, "$.target.sigma_r")?,
        "$.target.sigma_r",
    )?;
    if let Some(dim) = target_doc.get("dim") {
        let d = as_usize(dim, "$.target.dim")?;
        if d != sigma_r.dim() {
            return Err(format_err(
                "$.target.dim",
                format!("declared dimension {d} but sigma_r is {0}x{0}", sigma_r.dim()),
            ));
        }
    }
    require_zero_mean(target_doc.get("mean"), "$.target.mean")?;
    let target =
        TargetShape::new(sigma_r).map_err(|e| format_err("$.target.sigma_r", e.to_string()))?;

    let mut lambda = 1.0;
    let mut dca = DcaConfig::default();
    if let Some(solver) = doc.get("solver") {
        check_keys(solver, &["lambda", "dca", "backend"], "$.solver")?;
        if let Some(l) = solver.get("lambda") {
            lambda = as_f64(l, "$.solver.lambda")?;
            if lambda <= 0.0 {
                return Err(format_err("$.solver.lambda", "lambda must be positive"));
            }
        }
        if let Some(d) = solver.get("dca") {
            check_keys(d, &["max_iters", "tol_abs", "tol_rel", "init"], "$.solver.dca")?;
            if let Some(v) = d.get("max_iters") {
                dca.max_iters = as_usize(v, "$.solver.dca.max_iters")?;
            }
            if let Some(v) = d.get("tol_abs") {
                dca.tol_abs = as_f64(v, "$.solver.dca.tol_abs")?;
            }
            if let Some(v) = d.get("tol_rel") {
                dca.tol_rel = as_f64(v, "$.solver.dca.tol_rel")?;
            }
            if let Some(v) = d.get("init") {
                dca.init = parse_init(v, "$.solver.dca.init")?;
            }
        }
        if let Some(bk) = doc
            .get("solver")
            .and_then(|s| s.get("backend"))
        {
            check_keys(
                bk,
                &["feas_tol", "gap_tol", "max_iters", "verbose"],
                "$.solver.backend",
            )?;
            let mut settings = BackendSettings::default();
            if let Some(v) = bk.get("feas_tol") {
                settings.feas_tol = as_f64(v, "$.solver.backend.feas_tol")?;
            }
            if let Some(v) = bk.get("gap_tol") {
                settings.gap_tol = as_f64(v, "$.solver.backend.gap_tol")?;
            }
            if let Some(v) = bk.get("max_iters") {
                settings.max_iters = as_usize(v, "$.solver.backend.max_iters")? as u32;
            }
            if let Some(v) = bk.get("verbose") {
                settings.verbose = v
                    .as_bool()
                    .ok_or_else(|| format_err("$.solver.backend.verbose", "expected a boolean"))?;
            }
            dca.backend = settings;
        }
    }

    let seed = match doc.get("seed") {
        Some(v) => v
            .as_u64()
            .ok_or_else(|| format_err("$.seed", "expected a non-negative integer"))?,
        None => 0,
    };

    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let inputs_hash = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();

    Ok(LoadedProblem {
        params,
        target,
        lambda,
        dca,
        seed,
        inputs_hash,
    })
}

/// Read and parse a problem file.
pub fn load_problem(path: &Path) -> Result<LoadedProblem> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text)
}
