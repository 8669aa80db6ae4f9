//! Trace distances, error reports with bound verdicts, the error-phase
//! budget and the large-`n` error prediction.

use std::f64::consts::PI;

use serde::Serialize;

use crate::engine::ProtectedRun;
use crate::error::{Error, Result};
use crate::linalg::{trace_norm, DensityMatrix};
use crate::protocols::{PulseSchedule, ScalingRule};

/// Slack absorbed by every inequality verdict.
pub const VERDICT_SLACK: f64 = 1e-9;

/// `½‖a − b‖₁`, clamped to `[0, 1]`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok((0.5 * trace_norm(&(a.matrix() - b.matrix()))).clamp(0.0, 1.0))
}

/// Terms of the worst-case error-phase budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiBudget {
    /// `α(JT)²/(L/K)`, the residual of ideal-pulse decoupling.
    pub term1: f64,
    /// `JTw/(τ+w)`, the finite pulse-width contribution.
    pub term2: f64,
    /// `JT((e^{2βT_c} − 1)/(2βT_c) − 1)`.
    pub term3: f64,
    pub total: f64,
    /// `term3 ≤ JT` and `J·T_c < π`.
    pub valid: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn phi_budget(j: f64, t: f64, w: f64, tau: f64, k: usize, l: usize, beta: f64, alpha: f64) -> PhiBudget {
    let jt = j * t;
    let tc = k as f64 * (tau + w);
    let term1 = alpha * jt * jt * k as f64 / l as f64;
    let term2 = jt * w / (tau + w);
    let x = 2.0 * beta * tc;
    let term3 = if x == 0.0 { 0.0 } else { jt * (x.exp_m1() / x - 1.0) };
    PhiBudget {
        term1,
        term2,
        term3,
        total: term1 + term2 + term3,
        valid: term3 <= jt && j * tc < PI,
    }
}

/// Budget for a concrete schedule.
pub fn schedule_budget(schedule: &PulseSchedule, j: f64, beta: f64, alpha: f64) -> PhiBudget {
    phi_budget(
        j,
        schedule.total_time(),
        schedule.w(),
        schedule.tau(),
        schedule.k(),
        schedule.l(),
        beta,
        alpha,
    )
}

/// Predicted decoupling error under the scaling rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    /// `(J/Δ₀)² n^{−ε₁}`.
    pub t1: f64,
    /// `n^{−ε₂}`.
    pub t2: f64,
    /// `(J/Δ₀) n^{1−ε₁}`.
    pub t3: f64,
    pub total: f64,
}

pub fn dd_error_prediction(rule: &ScalingRule, n: usize) -> Result<Prediction> {
    rule.validate()?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("problem size n = {n} must be at least 2")));
    }
    let nf = n as f64;
    let ratio = rule.coupling / rule.delta0;
    let t1 = ratio * ratio * nf.powf(-rule.eps1);
    let t2 = nf.powf(-rule.eps2);
    let t3 = ratio * nf.powf(1.0 - rule.eps1);
    Ok(Prediction {
        t1,
        t2,
        t3,
        total: t1 + t2 + t3,
    })
}

/// Named boolean checks of a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdicts {
    /// `δ_S ≤ d_tot`.
    pub monotonicity: bool,
    /// `d_tot ≤ d_D + d_ad`.
    pub triangle: bool,
    /// `δ_S ≤ d_D + δ_ad`.
    pub bound_chain: bool,
    /// `d_D ≤ min(1, (e^Φ − 1)/2)`; `None` unless `Φ ≤ 1`.
    pub phase_bound: Option<bool>,
}

impl Verdicts {
    pub fn all_pass(&self) -> bool {
        self.monotonicity && self.triangle && self.bound_chain && self.phase_bound.unwrap_or(true)
    }
}

/// Distances, error phase and bound checks for one protected run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub n: usize,
    #[serde(rename = "J")]
    pub j: f64,
    pub tau: f64,
    pub w: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub delta_ad: f64,
    #[serde(rename = "d_D")]
    pub d_d: f64,
    #[serde(rename = "delta_S")]
    pub delta_s: f64,
    pub d_tot: f64,
    pub phi: Option<f64>,
    /// `d_D + δ_ad − δ_S`.
    #[serde(rename = "slack_eq3")]
    pub slack_chain: f64,
    /// `min(1, (e^Φ − 1)/2) − d_D`, when `Φ` is defined.
    #[serde(rename = "slack_eq5")]
    pub slack_phase: Option<f64>,
    pub d_ad: f64,
    pub slack_monotonicity: f64,
    pub slack_triangle: f64,
    pub budget: PhiBudget,
    pub prediction: Option<Prediction>,
    pub verdicts: Verdicts,
}

/// Computes every distance of a protected run and evaluates the bounds.
/// `beta` is `max_s ‖H_ad(s) + H_B‖`, `alpha` the budget constant.
pub fn error_report(
    run: &ProtectedRun,
    schedule: &PulseSchedule,
    coupling: f64,
    beta: f64,
    alpha: f64,
) -> Result<ErrorReport> {
    if (run.total_time - schedule.total_time()).abs() > 1e-9 * schedule.total_time() {
        return Err(Error::InvalidParameter("run and schedule describe different runtimes".into()));
    }
    let n = schedule.group().num_qubits();
    let d_d = trace_distance(&run.coupled.rho_final, &run.uncoupled.rho_final)?;
    let delta_s = trace_distance(&run.coupled.rho_s_final, &run.ideal_system)?;
    let ideal_joint = run.ideal_joint();
    let d_tot = trace_distance(&run.coupled.rho_final, &ideal_joint)?;
    let delta_ad = run.closed.delta_ad;
    let d_ad = delta_ad;
    let phi = run.coupled.phi;

    let slack_monotonicity = d_tot - delta_s;
    let slack_triangle = d_d + d_ad - d_tot;
    let slack_chain = d_d + delta_ad - delta_s;
    let slack_phase = phi.map(|p| (p.exp_m1() / 2.0).min(1.0) - d_d);
    let verdicts = Verdicts {
        monotonicity: slack_monotonicity >= -VERDICT_SLACK,
        triangle: slack_triangle >= -VERDICT_SLACK,
        bound_chain: slack_chain >= -VERDICT_SLACK,
        phase_bound: match (phi, slack_phase) {
            (Some(p), Some(s)) if p <= 1.0 => Some(s >= -VERDICT_SLACK),
            _ => None,
        },
    };
    Ok(ErrorReport {
        n,
        j: coupling,
        tau: schedule.tau(),
        w: schedule.w(),
        k: schedule.k(),
        l: schedule.l(),
        t: schedule.total_time(),
        delta_ad,
        d_d,
        delta_s,
        d_tot,
        phi,
        slack_chain,
        slack_phase,
        d_ad,
        slack_monotonicity,
        slack_triangle,
        budget: schedule_budget(schedule, coupling, beta, alpha),
        prediction: None,
        verdicts,
    })
}

/// Smallest `α ≥ 0` for which the decoupling residual `term1` covers the
/// measured phase left after the pulse-width term, `Φ ≤ term1 + term2`, on
/// every report with a defined `Φ`. The bath-dynamics term `term3` is left
/// out so the constant is fitted to the ideal-pulse residual alone.
pub fn calibrate_alpha(reports: &[ErrorReport]) -> f64 {
    reports
        .iter()
        .filter_map(|r| {
            let phi = r.phi?;
            let unit = phi_budget(r.j, r.t, r.w, r.tau, r.k, r.l, 0.0, 1.0).term1;
            if unit == 0.0 {
                return None;
            }
            Some((phi - r.budget.term2) / unit)
        })
        .fold(0.0_f64, f64::max)
}

/// CSV column order.
pub const CSV_COLUMNS: [&str; 14] = [
    "n",
    "J",
    "tau",
    "w",
    "K",
    "L",
    "T",
    "delta_ad",
    "d_D",
    "delta_S",
    "d_tot",
    "phi",
    "slack_eq3",
    "slack_eq5",
];

/// Round-trip float formatting for CSV cells; missing values print `nan`.
pub fn fmt_float(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.16e}"),
        None => "nan".into(),
    }
}

impl ErrorReport {
    pub fn csv_header() -> String {
        CSV_COLUMNS.join(",")
    }

    pub fn csv_row(&self) -> String {
        let f = |x: f64| fmt_float(Some(x));
        [
            self.n.to_string(),
            f(self.j),
            f(self.tau),
            f(self.w),
            self.k.to_string(),
            self.l.to_string(),
            f(self.t),
            f(self.delta_ad),
            f(self.d_d),
            f(self.delta_s),
            f(self.d_tot),
            fmt_float(self.phi),
            f(self.slack_chain),
            fmt_float(self.slack_phase),
        ]
        .join(",")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testing::{random_density, rng};
    use crate::linalg::{c, StateVector};
    use nalgebra::DVector;

    fn pure(a: [f64; 2]) -> DensityMatrix {
        StateVector::normalized(DVector::from_vec(vec![c(a[0]), c(a[1])]))
            .unwrap()
            .to_density()
    }

    #[test]
    fn trace_distance_examples() {
        let zero = pure([1.0, 0.0]);
        let one = pure([0.0, 1.0]);
        let plus = pure([1.0, 1.0]);
        assert_eq!(trace_distance(&zero, &zero).unwrap(), 0.0);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-15);
        // ρ − σ has eigenvalues ±1/√2.
        assert!((trace_distance(&zero, &plus).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(trace_distance(&zero, &DensityMatrix::maximally_mixed(4)).is_err());
    }

    #[test]
    fn partial_trace_contracts_distance() {
        let mut r = rng(8);
        for _ in 0..20 {
            let a = random_density(&mut r, 8);
            let b = random_density(&mut r, 8);
            let joint = trace_distance(&a, &b).unwrap();
            let ra = a.partial_trace(&[4, 2], &[0]).unwrap();
            let rb = b.partial_trace(&[4, 2], &[0]).unwrap();
            assert!(trace_distance(&ra, &rb).unwrap() <= joint + 1e-12);
            let c_ = random_density(&mut r, 8);
            let ac = trace_distance(&a, &c_).unwrap();
            let bc = trace_distance(&b, &c_).unwrap();
            assert!(joint <= ac + bc + 1e-12);
        }
    }

    #[test]
    fn budget_terms() {
        // T = 10, K = 4, L = 400, w = 0 gives τ = 0.025 and T_c = 0.1.
        let b = phi_budget(0.1, 10.0, 0.0, 0.025, 4, 400, 1.0, 1.0);
        assert!((b.term1 - 0.01).abs() < 1e-15);
        assert_eq!(b.term2, 0.0);
        let x: f64 = 0.2;
        let series: f64 = (1..30).map(|k| x.powi(k) / (1..=k + 1).map(|i| i as f64).product::<f64>()).sum();
        assert!((b.term3 - series).abs() < 1e-12);
        assert!((b.term3 - 0.10701379080084927).abs() < 1e-12);
        assert!((b.total - (b.term1 + b.term3)).abs() < 1e-15);
        assert!(b.valid);

        // T_c = 0.04 with JT = 1.
        let b = phi_budget(0.1, 10.0, 0.0, 0.01, 4, 1000, 1.0, 1.0);
        assert!((b.term3 - 0.04108834593698196).abs() < 1e-12);
        assert!((b.term1 - 0.004).abs() < 1e-15);

        let doubled = phi_budget(0.1, 10.0, 0.0, 0.025, 4, 800, 1.0, 1.0);
        let base = phi_budget(0.1, 10.0, 0.0, 0.025, 4, 400, 1.0, 1.0);
        assert!((doubled.term1 - base.term1 / 2.0).abs() < 1e-15);

        let wide = phi_budget(0.2, 5.0, 0.01, 0.04, 4, 100, 0.5, 2.0);
        assert!((wide.term2 - 1.0 * 0.01 / 0.05).abs() < 1e-15);
        assert!(!phi_budget(10.0, 5.0, 0.0, 0.1, 4, 100, 0.5, 1.0).valid);
    }

    #[test]
    fn prediction_terms() {
        let rule = ScalingRule::new(1.0, 0.0, 1.5, 0.5).unwrap();
        let p = dd_error_prediction(&rule, 4).unwrap();
        assert!((p.t1 - 0.125).abs() < 1e-15);
        assert!((p.t2 - 0.5).abs() < 1e-15);
        assert!((p.t3 - 0.5).abs() < 1e-15);
        assert!((p.total - 1.125).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for n in [2, 4, 8, 16, 64, 1024] {
            let t = dd_error_prediction(&rule, n).unwrap().total;
            assert!(t < prev);
            prev = t;
        }
        let doubled = ScalingRule::new(1.0, 0.0, 1.5, 1.0).unwrap();
        let q = dd_error_prediction(&doubled, 4).unwrap();
        assert!((q.t2 - p.t2 * p.t2).abs() < 1e-15);
        assert!(dd_error_prediction(&rule, 1).is_err());
    }

    fn synthetic(phi: Option<f64>, l: usize) -> ErrorReport {
        let (j, t, tau, k) = (0.1, 10.0, 10.0 / l as f64, 4);
        ErrorReport {
            n: 4,
            j,
            tau,
            w: 0.0,
            k,
            l,
            t,
            delta_ad: 0.0,
            d_d: 0.0,
            delta_s: 0.0,
            d_tot: 0.0,
            phi,
            slack_chain: 0.0,
            slack_phase: None,
            d_ad: 0.0,
            slack_monotonicity: 0.0,
            slack_triangle: 0.0,
            budget: phi_budget(j, t, 0.0, tau, k, l, 1.0, 1.0),
            prediction: None,
            verdicts: Verdicts {
                monotonicity: true,
                triangle: true,
                bound_chain: true,
                phase_bound: None,
            },
        }
    }

    #[test]
    fn alpha_calibration() {
        // Unit term1 is (JT)²K/L = 4/L.
        let reports = [synthetic(Some(0.02), 400), synthetic(Some(0.03), 200), synthetic(None, 100)];
        assert!((calibrate_alpha(&reports) - 2.0).abs() < 1e-12);
        assert_eq!(calibrate_alpha(&[]), 0.0);
    }

    #[test]
    fn csv_formatting() {
        assert_eq!(fmt_float(Some(0.1)), "1.0000000000000001e-1");
        assert_eq!(fmt_float(None), "nan");
        assert_eq!("1.0000000000000001e-1".parse::<f64>().unwrap(), 0.1);
        assert_eq!(ErrorReport::csv_header().split(',').count(), 14);
    }
}
