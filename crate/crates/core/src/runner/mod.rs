//! Experiment orchestration: building a run from an [`ExperimentConfig`],
//! single runs, sweeps, spectral scans, code listings and the verification
//! suite, plus result files.

mod config;
mod sweep;
mod verify;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub use config::{
    load_config, AxisConfig, ExperimentConfig, ExplicitProtocol, GroupPreset, ModelConfig, OutputConfig, Preset,
    ProtocolConfig, RunConfig, ScalingProtocol, SweepConfig, TermConfig,
};
pub use sweep::{run_sweep, write_sweep, SweepPoint, SweepResult, SweepRow};
pub use verify::{verify, verify_with, Check, SuiteResult};

use crate::codes::{code_from_universal_group, encode_hamiltonian, penalty_hamiltonian, universal_group, DecouplingGroup};
use crate::engine::{bath_initial_state, run_protected, IntegratorConfig, Penalty, ProtectedModel, ProtectedRun};
use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;
use crate::metrics::{dd_error_prediction, error_report, ErrorReport, Prediction};
use crate::model::{linear_decoherence, min_gap, norm_bounds, universal_2local, AdiabaticSpec, SpectralReport, SystemBathSpec, Terms};
use crate::pauli::DEFAULT_MAX_QUBITS;
use crate::protocols::{pdd_schedule, scaled_parameters, PulseSchedule, ScalingRule};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "AQC_SHIELD_OUT";

/// Sample count used for `β = max_s ‖H_ad(s) + H_B‖`.
const NORM_SAMPLES: usize = 41;

/// Outcome of a run as a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    ExecutionError,
    VerdictFailed,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::ExecutionError => 1,
            ExitStatus::VerdictFailed => 2,
        }
    }
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(seed) = self.seed {
            cfg.model.seed = seed;
        }
        if let Some(tol) = self.tolerance {
            cfg.run.tolerance = tol;
        }
        cfg.validate()
    }

    /// Output directory: explicit flag, then `AQC_SHIELD_OUT`, then the
    /// config's `output.dir`.
    pub fn output_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        if let Some(dir) = &self.out_dir {
            return dir.clone();
        }
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => PathBuf::from(&cfg.output.dir),
        }
    }
}

/// All inputs of a protected run, built from a config.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: AdiabaticSpec,
    pub bath: SystemBathSpec,
    pub schedule: PulseSchedule,
    pub penalty: Option<Penalty>,
    pub bath_initial: DensityMatrix,
    pub integrator: IntegratorConfig,
    pub alpha: f64,
    /// `max_s ‖H_ad(s) + H_B‖`.
    pub beta: f64,
    pub prediction: Option<Prediction>,
}

fn parse_terms(terms: &[TermConfig]) -> Result<Terms> {
    terms.iter().map(TermConfig::parse).collect()
}

fn logical_qubits(m: &ModelConfig) -> usize {
    if m.encoded {
        m.n - 2
    } else {
        m.n
    }
}

/// Builds the adiabatic problem of a config for a given runtime.
pub fn build_spec(m: &ModelConfig, total_time: f64) -> Result<AdiabaticSpec> {
    match (&m.preset, &m.h0, &m.h1) {
        (Some(Preset::Universal2Local), _, _) => universal_2local(m.n, m.encoded, m.schedule, total_time, m.delta0),
        (None, Some(h0), Some(h1)) => {
            let (h0, h1) = (parse_terms(h0)?, parse_terms(h1)?);
            if m.encoded {
                let (code, _) = code_from_universal_group(m.n)?;
                AdiabaticSpec::new(
                    m.n,
                    encode_hamiltonian(m.n, &h0)?,
                    encode_hamiltonian(m.n, &h1)?,
                    m.schedule,
                    total_time,
                    m.delta0,
                )?
                .with_code(code)
            } else {
                AdiabaticSpec::new(m.n, h0, h1, m.schedule, total_time, m.delta0)
            }
        }
        _ => Err(Error::Config("model needs a preset or both h0 and h1".into())),
    }
}

fn build_group(p: &ProtocolConfig, n: usize) -> Result<DecouplingGroup> {
    match p.group {
        GroupPreset::Universal => universal_group(n),
        GroupPreset::None => Ok(DecouplingGroup::trivial(n)),
    }
}

fn dilate(cycles: usize, r: f64) -> usize {
    ((cycles as f64 * r).round() as usize).max(1)
}

/// Builds the pulse schedule and, for scaling-rule protocols, the error
/// prediction.
pub fn build_schedule(cfg: &ExperimentConfig) -> Result<(PulseSchedule, Option<Prediction>)> {
    let m = &cfg.model;
    let p = &cfg.protocol;
    let group = build_group(p, m.n)?;
    let k = group.order();
    match (&p.explicit, &p.scaling) {
        (Some(e), None) => {
            let cycles = match (e.cycles, e.total_time) {
                (Some(c), None) => c,
                (None, Some(t)) => {
                    let cycle = k as f64 * (e.tau + e.w);
                    let c = (t / cycle).round();
                    if c < 1.0 || (c * cycle - t).abs() > 1e-9 * t {
                        return Err(Error::Config(format!(
                            "protocol.explicit.total_time: {t} is not a whole number of cycles of length {cycle}"
                        )));
                    }
                    c as usize
                }
                _ => return Err(Error::Config("protocol.explicit: give exactly one of `cycles` and `total_time`".into())),
            };
            Ok((pdd_schedule(&group, e.tau, e.w, dilate(cycles, cfg.run.dilation))?, None))
        }
        (None, Some(s)) => {
            if !(m.coupling > 0.0) {
                return Err(Error::Config("model.coupling: scaling rules need J > 0".into()));
            }
            let rule = ScalingRule {
                zeta: s.zeta,
                z: s.z,
                eps1: s.eps1,
                eps2: s.eps2,
                delta0: m.delta0,
                coupling: m.coupling,
                alpha: p.alpha,
                c_tau: s.c_tau,
                c_w: s.c_w,
            };
            rule.validate()
                .map_err(|e| Error::Config(format!("protocol.scaling: {e}")))?;
            let size = s.n.unwrap_or_else(|| logical_qubits(m));
            let params = scaled_parameters(&rule, size, k)?;
            let cycles = dilate(params.pulses / k, cfg.run.dilation);
            let schedule = pdd_schedule(&group, params.tau, params.w, cycles)?;
            Ok((schedule, Some(dd_error_prediction(&rule, size)?)))
        }
        _ => Err(Error::Config("protocol needs exactly one of `explicit` and `scaling`".into())),
    }
}

/// Builds every input of a protected run.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Experiment> {
    cfg.validate()?;
    let m = &cfg.model;
    let qubits = m.n + m.n_bath;
    if qubits > DEFAULT_MAX_QUBITS {
        return Err(Error::DimensionOverflow {
            qubits,
            max: DEFAULT_MAX_QUBITS,
        });
    }
    let (schedule, prediction) = build_schedule(cfg)?;
    let spec = build_spec(m, schedule.total_time())?;
    let bath = linear_decoherence(m.n, m.n_bath, m.coupling, m.bath_norm, m.seed)?;
    let penalty = if m.penalty > 0.0 {
        Some(Penalty {
            hamiltonian: penalty_hamiltonian(&universal_group(m.n)?, m.penalty)?,
            during_pulses: m.penalty_during_pulses,
        })
    } else {
        None
    };
    let bath_initial = bath_initial_state(&bath, cfg.run.bath_state)?;
    let beta = norm_bounds(&spec, bath.h_b(), NORM_SAMPLES)?.beta;
    let integrator = IntegratorConfig {
        tolerance: cfg.run.tolerance,
        max_steps: cfg.run.max_steps,
        ..IntegratorConfig::default()
    };
    Ok(Experiment {
        spec,
        bath,
        schedule,
        penalty,
        bath_initial,
        integrator,
        alpha: cfg.protocol.alpha,
        beta,
        prediction,
    })
}

/// Result of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: ErrorReport,
    pub run: ProtectedRun,
}

impl Outcome {
    pub fn status(&self) -> ExitStatus {
        if self.report.verdicts.all_pass() {
            ExitStatus::Success
        } else {
            ExitStatus::VerdictFailed
        }
    }
}

impl Experiment {
    pub fn run(&self) -> Result<Outcome> {
        let model = ProtectedModel {
            spec: &self.spec,
            bath: &self.bath,
            penalty: self.penalty.as_ref(),
        };
        let run = run_protected(model, &self.schedule, &self.bath_initial, &self.integrator)?;
        let mut report = error_report(
            &run,
            &self.schedule,
            self.bath.coupling_strength(),
            self.beta,
            self.alpha,
        )?;
        report.prediction = self.prediction;
        Ok(Outcome { report, run })
    }
}

/// Builds and runs a config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let exp = prepare(cfg)?;
    log::info!(
        "running n={} n_B={} K={} L={} T={}",
        cfg.model.n,
        cfg.model.n_bath,
        exp.schedule.k(),
        exp.schedule.l(),
        exp.schedule.total_time()
    );
    let outcome = exp.run()?;
    let d = &outcome.run.coupled.diagnostics;
    log::info!("integrator: {} accepted, {} rejected steps", d.accepted, d.rejected);
    Ok(outcome)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

/// JSON summary of a report.
pub fn report_json(report: &ErrorReport) -> String {
    let mut text = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
    text.push('\n');
    text
}

/// Writes `report.csv` and `report.json` as enabled by `output`; returns the
/// written paths.
pub fn write_report(dir: &Path, output: &OutputConfig, report: &ErrorReport) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    if output.csv {
        let path = dir.join("report.csv");
        write_file(&path, &format!("{}\n{}\n", ErrorReport::csv_header(), report.csv_row()))?;
        written.push(path);
    }
    if output.json {
        let path = dir.join("report.json");
        write_file(&path, &report_json(report))?;
        written.push(path);
    }
    Ok(written)
}

/// Spectrum of `H_ad(s)` on a uniform grid of `cfg.run.gap_points` points,
/// with a refined minimum.
pub fn gap_scan(cfg: &ExperimentConfig) -> Result<SpectralReport> {
    cfg.validate()?;
    let (schedule, _) = build_schedule(cfg)?;
    let spec = build_spec(&cfg.model, schedule.total_time())?;
    min_gap(&spec, cfg.run.gap_points, true)
}

/// `s, E0, E1, …, gap` table of a spectral scan.
pub fn gap_csv(report: &SpectralReport) -> String {
    let levels = report.energies.first().map_or(0, Vec::len);
    let mut out = String::from("s");
    for k in 0..levels {
        let _ = write!(out, ",E{k}");
    }
    out.push_str(",gap\n");
    for (s, e) in report.s.iter().zip(&report.energies) {
        let mut row = vec![format!("{s:.16e}")];
        row.extend(e.iter().map(|v| format!("{v:.16e}")));
        let gap = if e.len() > 1 { e[1] - e[0] } else { f64::NAN };
        row.push(format!("{gap:.16e}"));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Codewords and logical operators of the `[[n, n−2, 2]]` code, one item
/// per line.
pub fn code_listing(n: usize) -> Result<String> {
    let (code, logicals) = code_from_universal_group(n)?;
    let mut out = String::new();
    let _ = writeln!(out, "[[{n},{},2]] code", code.num_logical());
    let gens: Vec<String> = code.generators().iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "stabilizers: {}", gens.join(" "));
    for cw in code.codewords() {
        let _ = writeln!(out, "{cw}");
    }
    for (j, (x, z)) in logicals.xbars.iter().zip(&logicals.zbars).enumerate() {
        let _ = writeln!(out, "X{j} = {x}  Z{j} = {z}");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra_model: &str, protocol: &str) -> ExperimentConfig {
        let text = format!(
            "[model]\npreset = \"universal-2local\"\nseed = 3\n{extra_model}\n[protocol.explicit]\n{protocol}\n"
        );
        ExperimentConfig::parse(&text).unwrap()
    }

    #[test]
    fn total_time_must_be_whole_cycles() {
        let cfg = config("", "tau = 0.25\ntotal_time = 2.0");
        let (s, _) = build_schedule(&cfg).unwrap();
        assert_eq!(s.cycles(), 2);
        assert_eq!(s.l(), 8);
        let cfg = config("", "tau = 0.25\ntotal_time = 2.5");
        assert!(build_schedule(&cfg).unwrap_err().to_string().contains("total_time"));
    }

    #[test]
    fn dilation_scales_cycles() {
        let mut cfg = config("", "tau = 0.25\ncycles = 3");
        cfg.run.dilation = 2.0;
        let (s, _) = build_schedule(&cfg).unwrap();
        assert_eq!(s.cycles(), 6);
        assert!((s.total_time() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_protocol_builds_prediction() {
        let text = "[model]\npreset = \"universal-2local\"\n[protocol.scaling]\nzeta = 2.0\nz = 0.0\neps1 = 1.5\neps2 = 0.5\nc_w = 0.1\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        let (s, pred) = build_schedule(&cfg).unwrap();
        assert_eq!(s.k(), 4);
        assert_eq!(s.l() % 4, 0);
        assert!(pred.is_some());
        assert!(s.w() > 0.0 && s.w() < s.tau());
    }

    #[test]
    fn dimension_guard() {
        let cfg = config("n = 12\nn_bath = 2", "tau = 0.25\ncycles = 1");
        assert!(matches!(prepare(&cfg), Err(Error::DimensionOverflow { qubits: 14, .. })));
    }

    #[test]
    fn zero_coupling_gives_zero_distance() {
        let cfg = config("coupling = 0.0", "tau = 0.2\ncycles = 2");
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.report.d_d, 0.0);
        assert_eq!(out.status(), ExitStatus::Success);
    }

    #[test]
    fn code_listing_n4() {
        let text = code_listing(4).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "[[4,2,2]] code");
        assert!(text.contains("00: (|0000⟩+|1111⟩)/√2"));
        assert_eq!(lines.iter().filter(|l| l.contains("⟩)/√2")).count(), 4);
    }

    #[test]
    fn gap_table_shape() {
        let mut cfg = config("", "tau = 0.25\ncycles = 1");
        cfg.run.gap_points = 5;
        let rep = gap_scan(&cfg).unwrap();
        let table = gap_csv(&rep);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "s,E0,E1,E2,E3,gap");
    }

    #[test]
    fn output_dir_precedence() {
        let cfg = config("", "tau = 0.25\ncycles = 1");
        let o = Overrides {
            out_dir: Some("flag".into()),
            ..Default::default()
        };
        assert_eq!(o.output_dir(&cfg), PathBuf::from("flag"));
    }
}
