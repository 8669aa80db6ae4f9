//! Experiment configuration: a TOML document with `[model]`, `[protocol]`,
//! `[run]`, `[output]` and, for sweeps, `[sweep]` sections.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::BathState;
use crate::error::{Error, Result};
use crate::model::ScheduleKind;
use crate::pauli::PauliString;

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn default_n() -> usize {
    4
}

fn one_usize() -> usize {
    1
}

fn default_coupling() -> f64 {
    0.1
}

fn default_bath_norm() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    #[serde(rename = "universal-2local")]
    Universal2Local,
}

/// One `coef · pauli` term of a custom Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub pauli: String,
    pub coef: f64,
}

impl TermConfig {
    pub fn parse(&self) -> Result<(f64, PauliString)> {
        let p: PauliString = self
            .pauli
            .parse()
            .map_err(|e| Error::Config(format!("term `{}`: {e}", self.pauli)))?;
        Ok((self.coef, p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Physical system qubits.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Run the computation inside the `[[n, n−2, 2]]` code.
    #[serde(default = "yes")]
    pub encoded: bool,
    #[serde(default = "one_usize")]
    pub n_bath: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    /// Custom terms; logical (`n − 2` qubits) when encoded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<Vec<TermConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h1: Option<Vec<TermConfig>>,
    #[serde(default)]
    pub schedule: ScheduleKind,
    #[serde(default = "one")]
    pub delta0: f64,
    /// `J = ‖H_SB‖`.
    #[serde(default = "default_coupling")]
    pub coupling: f64,
    /// `β_B = ‖H_B‖`.
    #[serde(default = "default_bath_norm")]
    pub bath_norm: f64,
    /// Energy penalty `E_P`; zero disables it.
    #[serde(default)]
    pub penalty: f64,
    #[serde(default = "yes")]
    pub penalty_during_pulses: bool,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GroupPreset {
    /// `{I, X^⊗n, Y^⊗n, Z^⊗n}`.
    #[default]
    Universal,
    /// `{I}`: no decoupling.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitProtocol {
    pub tau: f64,
    #[serde(default)]
    pub w: f64,
    /// Exactly one of `cycles` and `total_time`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingProtocol {
    pub zeta: f64,
    pub z: f64,
    pub eps1: f64,
    pub eps2: f64,
    #[serde(default = "one")]
    pub c_tau: f64,
    #[serde(default = "one")]
    pub c_w: f64,
    /// Problem size; defaults to the logical qubit count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    #[serde(default)]
    pub group: GroupPreset,
    /// Budget constant `α`.
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<ExplicitProtocol>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingProtocol>,
}

fn default_tolerance() -> f64 {
    1e-10
}

fn default_gap_points() -> usize {
    101
}

fn default_max_steps() -> usize {
    200_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Time dilation `r ≥ 1`: the number of cycles is scaled by `r`.
    #[serde(default = "one")]
    pub dilation: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub bath_state: BathState,
    #[serde(default = "default_gap_points")]
    pub gap_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dilation: 1.0,
            tolerance: default_tolerance(),
            max_steps: default_max_steps(),
            bath_state: BathState::default(),
            gap_points: default_gap_points(),
        }
    }
}

fn default_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub json: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            csv: true,
            json: true,
        }
    }
}

/// A swept parameter: dotted path into the config and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub path: String,
    pub values: Vec<toml::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<AxisConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

impl ExperimentConfig {
    /// Parses and validates a config document.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().trim().to_string();
            match e.span() {
                Some(span) => Error::Config(format!("line {}: {msg}", line_of(text, span.start))),
                None => Error::Config(msg),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if m.n == 0 {
            return Err(invalid("model.n", "must be positive"));
        }
        if m.n_bath == 0 {
            return Err(invalid("model.n_bath", "must be positive"));
        }
        if m.encoded && (m.n < 4 || !m.n.is_multiple_of(2)) {
            return Err(invalid("model.n", "encoded runs need an even n ≥ 4"));
        }
        match (&m.preset, &m.h0, &m.h1) {
            (Some(_), None, None) | (None, Some(_), Some(_)) => {}
            (Some(_), _, _) => return Err(invalid("model.preset", "give either a preset or h0/h1 terms, not both")),
            _ => return Err(invalid("model", "needs a preset or both h0 and h1")),
        }
        for (name, v) in [("model.delta0", m.delta0)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("{v} must be positive")));
            }
        }
        for (name, v) in [
            ("model.coupling", m.coupling),
            ("model.bath_norm", m.bath_norm),
            ("model.penalty", m.penalty),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("{v} must be non-negative")));
            }
        }
        if m.penalty > 0.0 && !m.encoded {
            return Err(invalid("model.penalty", "the energy penalty needs an encoded model"));
        }

        let p = &self.protocol;
        if !(p.alpha > 0.0) {
            return Err(invalid("protocol.alpha", "must be positive"));
        }
        match (&p.explicit, &p.scaling) {
            (Some(e), None) => {
                if e.cycles.is_some() == e.total_time.is_some() {
                    return Err(invalid(
                        "protocol.explicit",
                        "give exactly one of `cycles` and `total_time`",
                    ));
                }
                if !(e.tau > 0.0) {
                    return Err(invalid("protocol.explicit.tau", "must be positive"));
                }
                if !(e.w >= 0.0) || e.w >= e.tau {
                    return Err(invalid("protocol.explicit.w", "must satisfy 0 ≤ w < tau"));
                }
                if e.cycles == Some(0) {
                    return Err(invalid("protocol.explicit.cycles", "must be positive"));
                }
                if let Some(t) = e.total_time {
                    if !(t > 0.0) {
                        return Err(invalid("protocol.explicit.total_time", "must be positive"));
                    }
                }
            }
            (None, Some(_)) => {}
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "protocol",
                    "`explicit` and `scaling` sections are mutually exclusive",
                ))
            }
            (None, None) => return Err(invalid("protocol", "needs an `explicit` or a `scaling` section")),
        }

        let r = &self.run;
        if !(r.dilation >= 1.0) || !r.dilation.is_finite() {
            return Err(invalid("run.dilation", "must be ≥ 1"));
        }
        if !(r.tolerance > 0.0) {
            return Err(invalid("run.tolerance", "must be positive"));
        }
        if r.gap_points < 2 {
            return Err(invalid("run.gap_points", "must be at least 2"));
        }
        if let Some(s) = &self.sweep {
            if s.axes.is_empty() {
                return Err(invalid("sweep.axes", "needs at least one axis"));
            }
            for a in &s.axes {
                if a.values.is_empty() {
                    return Err(invalid(&format!("sweep axis `{}`", a.path), "has no values"));
                }
            }
        }
        Ok(())
    }
}

/// Reads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
