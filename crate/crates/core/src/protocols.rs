//! Periodic dynamical-decoupling schedules, finite-width pulse generators,
//! the control Hamiltonian `H_C(t)` and the runtime/pulse scaling rule.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::codes::DecouplingGroup;
use crate::error::{Error, Result};
use crate::linalg::{c, identity, Matrix};
use crate::pauli::{PauliString, Phase};

/// A PDD sequence: `L` slots of length `τ + w`, slot `j` ending with pulse
/// `P_{j mod K}` occupying its last `w`.
#[derive(Debug, Clone)]
pub struct PulseSchedule {
    group: DecouplingGroup,
    tau: f64,
    w: f64,
    pulses_total: usize,
    pulses: Vec<PauliString>,
    generators: Vec<Matrix>,
}

/// One free-evolution or pulse interval of a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    /// Index into the cycle's pulses when this is a pulse window.
    pub pulse: Option<usize>,
}

/// Result of the sufficient Magnus convergence condition `J·T_c < π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnusGuard {
    pub j_tc: f64,
    pub converges: bool,
}

/// Builds the PDD schedule for `cycles` repetitions of the group sequence.
/// Pulse `k` is `P_k = G_{k+1}† G_k` with `G_K = G_0 = I`, so the ordered
/// product of one cycle is the identity up to sign.
pub fn pdd_schedule(g: &DecouplingGroup, tau: f64, w: f64, cycles: usize) -> Result<PulseSchedule> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::OutOfRange {
            name: "tau",
            value: tau,
            range: "(0, ∞)",
        });
    }
    if !(w >= 0.0) || !w.is_finite() {
        return Err(Error::OutOfRange {
            name: "w",
            value: w,
            range: "[0, ∞)",
        });
    }
    if w >= tau {
        return Err(Error::InvalidParameter(format!(
            "pulse width w = {w} must be shorter than the interval tau = {tau}"
        )));
    }
    if cycles == 0 {
        return Err(Error::InvalidParameter("cycles must be at least 1".into()));
    }
    let elems = g.elements();
    let k = elems.len();
    let mut pulses = Vec::with_capacity(k);
    for i in 0..k {
        let next = &elems[(i + 1) % k];
        pulses.push(next.adjoint().mul(&elems[i])?.with_phase(Phase::ONE));
    }
    let generators = if w > 0.0 {
        pulses.iter().map(|p| pulse_generator(p, w)).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(PulseSchedule {
        group: g.clone(),
        tau,
        w,
        pulses_total: cycles * k,
        pulses,
        generators,
    })
}

/// `H = (π/2w)(I − P)`, so that `exp(−i w H) = P` exactly.
pub fn pulse_generator(p: &PauliString, w: f64) -> Result<Matrix> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::OutOfRange {
            name: "w",
            value: w,
            range: "(0, ∞)",
        });
    }
    if !p.is_hermitian() {
        return Err(Error::InvalidParameter(format!("{p} is not an involution")));
    }
    let dense = p.to_dense()?;
    Ok((identity(dense.nrows()) - dense) * c(PI / (2.0 * w)))
}

impl PulseSchedule {
    pub fn group(&self) -> &DecouplingGroup {
        &self.group
    }

    /// Pulses per cycle.
    pub fn k(&self) -> usize {
        self.pulses.len()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    /// Total pulse count.
    pub fn l(&self) -> usize {
        self.pulses_total
    }

    pub fn cycles(&self) -> usize {
        self.pulses_total / self.k()
    }

    pub fn slot(&self) -> f64 {
        self.tau + self.w
    }

    pub fn total_time(&self) -> f64 {
        self.pulses_total as f64 * self.slot()
    }

    pub fn cycle_time(&self) -> f64 {
        self.k() as f64 * self.slot()
    }

    pub fn is_ideal(&self) -> bool {
        self.w == 0.0
    }

    pub fn pulses(&self) -> &[PauliString] {
        &self.pulses
    }

    /// Window generators `H_DD^(k)`; empty for ideal pulses.
    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    /// Start of slot `j`, `t_j = j(τ + w)`.
    pub fn slot_start(&self, j: usize) -> f64 {
        j as f64 * self.slot()
    }

    /// Free and pulse intervals in time order. Ideal schedules yield only
    /// free intervals; their pulses act as kicks at each slot end.
    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::with_capacity(2 * self.pulses_total);
        for j in 0..self.pulses_total {
            let start = self.slot_start(j);
            let end = self.slot_start(j + 1);
            if self.w > 0.0 {
                let edge = end - self.w;
                out.push(Segment {
                    start,
                    end: edge,
                    pulse: None,
                });
                out.push(Segment {
                    start: edge,
                    end,
                    pulse: Some(j % self.k()),
                });
            } else {
                out.push(Segment {
                    start,
                    end,
                    pulse: None,
                });
            }
        }
        out
    }

    /// Slot index containing `t` and the offset into that slot.
    fn locate(&self, t: f64) -> (usize, f64) {
        let slot = self.slot();
        let j = ((t / slot).floor() as usize).min(self.pulses_total - 1);
        (j, t - j as f64 * slot)
    }

    pub fn magnus_guard(&self, coupling: f64) -> MagnusGuard {
        let j_tc = coupling * self.cycle_time();
        MagnusGuard {
            j_tc,
            converges: j_tc < PI,
        }
    }

    pub fn summary(&self, coupling: f64) -> ScheduleSummary<'_> {
        ScheduleSummary {
            schedule: self,
            coupling,
        }
    }
}

/// `H_C(t)` on the system: zero in free intervals and the slot's generator
/// inside pulse windows. Ideal schedules have no windows and return zero.
pub fn control_hamiltonian(schedule: &PulseSchedule, t: f64) -> Result<Matrix> {
    let total = schedule.total_time();
    if !(0.0..=total).contains(&t) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            range: "[0, T]",
        });
    }
    let dim = 1usize << schedule.group.num_qubits();
    if schedule.is_ideal() {
        return Ok(Matrix::zeros(dim, dim));
    }
    let (j, offset) = schedule.locate(t);
    if offset >= schedule.tau {
        Ok(schedule.generators[j % schedule.k()].clone())
    } else {
        Ok(Matrix::zeros(dim, dim))
    }
}

/// Printable schedule description.
pub struct ScheduleSummary<'a> {
    schedule: &'a PulseSchedule,
    coupling: f64,
}

impl fmt::Display for ScheduleSummary<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.schedule;
        let guard = s.magnus_guard(self.coupling);
        writeln!(f, "K     = {}", s.k())?;
        writeln!(f, "tau   = {}", s.tau())?;
        writeln!(f, "w     = {}", s.w())?;
        writeln!(f, "L     = {}", s.l())?;
        writeln!(f, "T     = {}", s.total_time())?;
        writeln!(f, "T_c   = {}", s.cycle_time())?;
        write!(
            f,
            "J*T_c = {} ({})",
            guard.j_tc,
            if guard.converges { "converges" } else { "outside J*T_c < pi" }
        )
    }
}

/// Scaling of the pulse interval, width and runtime with problem size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingRule {
    pub zeta: f64,
    pub z: f64,
    pub eps1: f64,
    pub eps2: f64,
    #[serde(default = "one")]
    pub delta0: f64,
    #[serde(default = "one")]
    pub coupling: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub c_tau: f64,
    #[serde(default = "one")]
    pub c_w: f64,
}

fn one() -> f64 {
    1.0
}

impl ScalingRule {
    /// Rule with unit prefactors, `Δ₀ = J = α = 1`.
    pub fn new(zeta: f64, z: f64, eps1: f64, eps2: f64) -> Result<Self> {
        let rule = Self {
            zeta,
            z,
            eps1,
            eps2,
            delta0: 1.0,
            coupling: 1.0,
            alpha: 1.0,
            c_tau: 1.0,
            c_w: 1.0,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps1 > 1.0) {
            return Err(Error::OutOfRange {
                name: "eps1",
                value: self.eps1,
                range: "(1, ∞)",
            });
        }
        if !(self.eps2 > 0.0) {
            return Err(Error::OutOfRange {
                name: "eps2",
                value: self.eps2,
                range: "(0, ∞)",
            });
        }
        if !(self.z >= 0.0) {
            return Err(Error::OutOfRange {
                name: "z",
                value: self.z,
                range: "[0, ∞)",
            });
        }
        for (name, v) in [
            ("delta0", self.delta0),
            ("coupling", self.coupling),
            ("alpha", self.alpha),
            ("c_tau", self.c_tau),
            ("c_w", self.c_w),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "(0, ∞)",
                });
            }
        }
        let tol = 1e-12 * self.zeta.abs().max(1.0);
        if (self.zeta - (3.0 * self.z + 2.0)).abs() > tol && (self.zeta - (2.0 * self.z + 1.0)).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "zeta = {} matches neither 3z+2 nor 2z+1 for z = {}",
                self.zeta, self.z
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledParameters {
    pub tau: f64,
    pub w: f64,
    /// Target runtime `n^ζ/Δ₀`.
    pub total_time: f64,
    /// Pulse count, a positive multiple of `K`.
    pub pulses: usize,
}

/// `τ = c_τ n^{−(ζ+ε₁)}/Δ₀`, `w = c_w n^{−(2ζ+ε₁+ε₂)}/J`, `T = n^ζ/Δ₀`
/// and `L = round(T/(τ+w))` rounded up to a multiple of `k`.
pub fn scaled_parameters(rule: &ScalingRule, n: usize, k: usize) -> Result<ScaledParameters> {
    rule.validate()?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("problem size n = {n} must be at least 2")));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("K must be positive".into()));
    }
    let nf = n as f64;
    let tau = rule.c_tau * nf.powf(-(rule.zeta + rule.eps1)) / rule.delta0;
    let w = rule.c_w * nf.powf(-(2.0 * rule.zeta + rule.eps1 + rule.eps2)) / rule.coupling;
    let total_time = nf.powf(rule.zeta) / rule.delta0;
    let raw = (total_time / (tau + w)).round().max(1.0) as usize;
    let pulses = raw.div_ceil(k) * k;
    Ok(ScaledParameters {
        tau,
        w,
        total_time,
        pulses,
    })
}
