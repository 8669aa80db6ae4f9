//! Cross-product parameter sweeps over numeric config fields.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::{ensure_dir, run_experiment, write_file, ExperimentConfig};
use crate::error::{Error, Result};
use crate::metrics::{ErrorReport, CSV_COLUMNS};

/// One point of a sweep: the axis values and the resolved config.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub index: usize,
    pub values: Vec<toml::Value>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub values: Vec<toml::Value>,
    /// `ok`, `verdict-failed` or `error: <message>`.
    pub status: String,
    pub report: Option<ErrorReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub axes: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn any_failed_verdict(&self) -> bool {
        self.rows.iter().any(|r| r.status == "verdict-failed")
    }

    pub fn any_error(&self) -> bool {
        self.rows.iter().any(|r| r.status.starts_with("error"))
    }

    pub fn to_csv(&self) -> String {
        let mut header = vec!["index".to_string()];
        header.extend(self.axes.iter().cloned());
        header.extend(CSV_COLUMNS.iter().map(|c| c.to_string()));
        header.push("status".into());
        let mut out = header.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut cells = vec![row.index.to_string()];
            cells.extend(row.values.iter().map(value_cell));
            match &row.report {
                Some(r) => cells.push(r.csv_row()),
                None => cells.extend(CSV_COLUMNS.iter().map(|_| "nan".to_string())),
            }
            cells.push(csv_escape(&row.status));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn value_cell(v: &toml::Value) -> String {
    match v {
        toml::Value::Float(x) => format!("{x:.16e}"),
        other => other.to_string(),
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

fn lookup<'a>(root: &'a mut toml::Value, path: &str) -> Option<&'a mut toml::Value> {
    path.split('.').try_fold(root, |node, key| node.get_mut(key))
}

/// Coerces a sweep value to the type of the field it replaces.
fn coerce(path: &str, current: &toml::Value, value: &toml::Value) -> Result<toml::Value> {
    use toml::Value::{Float, Integer};
    match (current, value) {
        (Float(_), Float(_)) | (Integer(_), Integer(_)) => Ok(value.clone()),
        (Float(_), Integer(i)) => Ok(Float(*i as f64)),
        (Integer(_), Float(x)) if x.fract() == 0.0 && x.is_finite() => Ok(Integer(*x as i64)),
        _ => Err(Error::Config(format!(
            "sweep axis `{path}`: value {value} does not fit a numeric field"
        ))),
    }
}

/// Expands the sweep section of `cfg` into its cross product, first axis
/// outermost.
pub fn expand(cfg: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep: config has no [sweep] section".into()))?;
    let mut base = cfg.clone();
    base.sweep = None;
    let base_value = toml::Value::try_from(&base).map_err(|e| Error::Config(e.to_string()))?;

    for axis in &sweep.axes {
        if axis.values.is_empty() {
            return Err(Error::Config(format!("sweep axis `{}` has no values", axis.path)));
        }
        let mut probe = base_value.clone();
        match lookup(&mut probe, &axis.path) {
            Some(v @ (toml::Value::Float(_) | toml::Value::Integer(_))) => {
                let current = v.clone();
                for value in &axis.values {
                    coerce(&axis.path, &current, value)?;
                }
            }
            Some(_) => {
                return Err(Error::Config(format!("sweep axis `{}` is not a numeric field", axis.path)))
            }
            None => {
                return Err(Error::Config(format!(
                    "sweep axis `{}` does not name a field set in the config",
                    axis.path
                )))
            }
        }
    }

    let total: usize = sweep.axes.iter().map(|a| a.values.len()).product();
    let mut points = Vec::with_capacity(total);
    for index in 0..total {
        let mut rem = index;
        let mut picks = vec![0; sweep.axes.len()];
        for (slot, axis) in picks.iter_mut().zip(&sweep.axes).rev() {
            *slot = rem % axis.values.len();
            rem /= axis.values.len();
        }
        let mut doc = base_value.clone();
        let mut values = Vec::with_capacity(picks.len());
        for (axis, &pick) in sweep.axes.iter().zip(&picks) {
            let field = lookup(&mut doc, &axis.path).expect("axis path checked");
            let v = coerce(&axis.path, field, &axis.values[pick])?;
            *field = v.clone();
            values.push(v);
        }
        let config: ExperimentConfig = doc
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("sweep point {index}: {}", e.message())))?;
        points.push(SweepPoint { index, values, config });
    }
    Ok(points)
}

fn run_point(point: &SweepPoint) -> SweepRow {
    let result = point.config.validate().and_then(|_| run_experiment(&point.config));
    let (status, report) = match result {
        Ok(out) if out.report.verdicts.all_pass() => ("ok".to_string(), Some(out.report)),
        Ok(out) => ("verdict-failed".to_string(), Some(out.report)),
        Err(e) => (format!("error: {e}"), None),
    };
    SweepRow {
        index: point.index,
        values: point.values.clone(),
        status,
        report,
    }
}

/// Runs every sweep point on a pool of `parallelism` workers. Rows come back
/// in cross-product order; a failing point is recorded and the sweep goes on.
pub fn run_sweep(cfg: &ExperimentConfig, parallelism: usize) -> Result<SweepResult> {
    let points = expand(cfg)?;
    let axes = cfg
        .sweep
        .as_ref()
        .map(|s| s.axes.iter().map(|a| a.path.clone()).collect())
        .unwrap_or_default();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    log::info!("sweep: {} points on {} workers", points.len(), parallelism.max(1));
    let rows = pool.install(|| points.par_iter().map(run_point).collect());
    Ok(SweepResult { axes, rows })
}

/// Writes `sweep.csv` and `sweep.json` as enabled by the config.
pub fn write_sweep(dir: &Path, cfg: &ExperimentConfig, result: &SweepResult) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    if cfg.output.csv {
        let path = dir.join("sweep.csv");
        write_file(&path, &result.to_csv())?;
        written.push(path);
    }
    if cfg.output.json {
        let path = dir.join("sweep.json");
        let mut text = serde_json::to_string_pretty(result).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        write_file(&path, &text)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep_config(axes: &str) -> ExperimentConfig {
        let text = format!(
            "[model]\npreset = \"universal-2local\"\n[protocol.explicit]\ntau = 0.2\ncycles = 2\n[sweep]\naxes = [{axes}]\n"
        );
        ExperimentConfig::parse(&text).unwrap()
    }

    #[test]
    fn cross_product_order() {
        let cfg = sweep_config(
            "{ path = \"model.coupling\", values = [0.1, 0.2] }, { path = \"protocol.explicit.cycles\", values = [1, 2, 3] }",
        );
        let pts = expand(&cfg).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0].config.model.coupling, 0.1);
        assert_eq!(pts[2].config.protocol.explicit.as_ref().unwrap().cycles, Some(3));
        assert_eq!(pts[3].config.model.coupling, 0.2);
        assert_eq!(pts[3].config.protocol.explicit.as_ref().unwrap().cycles, Some(1));
        assert!(pts.iter().all(|p| p.config.sweep.is_none()));
    }

    #[test]
    fn integer_fields_take_integral_floats() {
        let cfg = sweep_config("{ path = \"model.n_bath\", values = [1.0, 2] }");
        let pts = expand(&cfg).unwrap();
        assert_eq!(pts[0].config.model.n_bath, 1);
        let cfg = sweep_config("{ path = \"model.n_bath\", values = [1.5] }");
        assert!(expand(&cfg).is_err());
    }

    #[test]
    fn bad_paths_are_rejected() {
        for axes in [
            "{ path = \"model.nope\", values = [1.0] }",
            "{ path = \"model.preset\", values = [1.0] }",
            "{ path = \"model.coupling\", values = [\"x\"] }",
        ] {
            assert!(expand(&sweep_config(axes)).is_err(), "{axes}");
        }
    }

    #[test]
    fn failing_points_are_recorded() {
        // w ≥ tau is rejected when the point is built.
        let cfg = sweep_config("{ path = \"protocol.explicit.tau\", values = [0.2, 0.0] }");
        let res = run_sweep(&cfg, 2).unwrap();
        assert_eq!(res.rows.len(), 2);
        assert_eq!(res.rows[0].status, "ok");
        assert!(res.rows[1].status.starts_with("error"));
        let csv = res.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().next().unwrap().ends_with("slack_eq5,status"));
    }
}
