//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
//! criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aqc_shield::codes::{
    anticommuting_count, code_from_universal_group, lifted_group_average, penalty_hamiltonian, universal_group,
};
use aqc_shield::engine::{run_closed_adiabatic, IntegratorConfig};
use aqc_shield::linalg::{commutator, eigh, op_norm};
use aqc_shield::metrics::{calibrate_alpha, dd_error_prediction, phi_budget, ErrorReport};
use aqc_shield::model::{h_ad, linear_decoherence, universal_2local, ScheduleKind};
use aqc_shield::pauli::{Pauli, PauliString};
use aqc_shield::protocols::ScalingRule;
use aqc_shield::runner::{code_listing, run_experiment, run_sweep, ExperimentConfig, GroupPreset, SweepRow};

const BIN: &str = env!("CARGO_BIN_EXE_aqc-shield");

/// Runtime of the protected sweep; long enough that `δ_ad ≈ 0.1`.
const SWEEP_T: f64 = 19.2;
const TAUS: [f64; 5] = [0.4, 0.2, 0.1, 0.05, 0.025];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn ket(bits: &str) -> DVector<Complex64> {
    let mut v = DVector::zeros(1 << bits.len());
    v[usize::from_str_radix(bits, 2).unwrap()] = Complex64::new(1.0, 0.0);
    v
}

fn codewords() -> Outcome {
    let out = Command::new(BIN).args(["code", "--n", "4"]).output().expect("run binary");
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let expected = [
        "00: (|0000⟩+|1111⟩)/√2",
        "10: (|0011⟩+|1100⟩)/√2",
        "01: (|0101⟩+|1010⟩)/√2",
        "11: (|0110⟩+|1001⟩)/√2",
    ];
    let lines_ok = out.status.success()
        && expected.iter().all(|l| text.lines().any(|x| x == *l))
        && text == code_listing(4).unwrap();
    let (code, _) = code_from_universal_group(4).unwrap();
    let table = [("00", "0000", "1111"), ("10", "0011", "1100"), ("01", "0101", "1010"), ("11", "0110", "1001")];
    let mut worst = 0.0_f64;
    for (label, a, b) in table {
        let word = code
            .codewords()
            .iter()
            .find(|w| w.label.iter().map(|b| char::from(b'0' + b)).collect::<String>() == label)
            .expect("label present");
        let psi = (ket(a) + ket(b)) / Complex64::new(2f64.sqrt(), 0.0);
        worst = worst.max(1.0 - psi.dotc(word.state.amplitudes()).norm_sqr());
    }
    outcome(
        lines_ok && worst <= 1e-12,
        format!("cli lines match: {lines_ok}, max infidelity {worst:.2e} (limit 1e-12)"),
    )
}

fn annihilation() -> Outcome {
    let mut worst = 0.0_f64;
    for n in [2, 4] {
        let g = universal_group(n).unwrap();
        for seed in 0..10 {
            let bath = linear_decoherence(n, 1, 1.0, 1.0, 1000 + seed).unwrap();
            let avg = lifted_group_average(&g, &bath.h_sb().unwrap(), bath.bath_dim()).unwrap();
            worst = worst.max(op_norm(&avg));
        }
    }
    outcome(worst <= 1e-12, format!("max ‖Π(H_SB)‖ = {worst:.2e} over n ∈ {{2,4}}, 10 seeds (limit 1e-12)"))
}

fn non_interference() -> Outcome {
    let spec = universal_2local(4, true, ScheduleKind::SmoothEndpoint, 1.0, 1.0).unwrap();
    let group = universal_group(4).unwrap().dense_elements().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let h = h_ad(&spec, rng.random_range(0.0..1.0)).unwrap();
        for g in &group {
            worst = worst.max(op_norm(&commutator(&h, g)));
        }
    }
    outcome(worst <= 1e-12, format!("max ‖[H_ad(s), G_k]‖ = {worst:.2e} over 20 s (limit 1e-12)"))
}

fn sweep_config() -> ExperimentConfig {
    let text = format!(
        r#"
[model]
preset = "universal-2local"
n = 4
encoded = true
bath_norm = 0.5
seed = 7

[protocol]
group = "universal"
[protocol.explicit]
tau = 0.4
total_time = {SWEEP_T}

[run]
tolerance = 1e-8

[sweep]
axes = [
  {{ path = "model.n_bath", values = [1, 2] }},
  {{ path = "model.coupling", values = [0.05, 0.1, 0.2] }},
  {{ path = "protocol.explicit.tau", values = {TAUS:?} }},
]
"#
    );
    ExperimentConfig::parse(&text).unwrap()
}

fn bound_chain(reports: &[ErrorReport]) -> Outcome {
    let worst_chain = reports.iter().map(|r| r.slack_chain).fold(f64::INFINITY, f64::min);
    let worst_tri = reports.iter().map(|r| r.slack_triangle).fold(f64::INFINITY, f64::min);
    outcome(
        reports.len() >= 20 && worst_chain >= -1e-9 && worst_tri >= -1e-9,
        format!(
            "{} runs, min slack δ_S ≤ d_D+δ_ad: {worst_chain:.3e}, min slack d_tot ≤ d_D+d_ad: {worst_tri:.3e}",
            reports.len()
        ),
    )
}

fn phase_relation(reports: &[ErrorReport]) -> Outcome {
    let eligible: Vec<&ErrorReport> = reports.iter().filter(|r| r.phi.is_some_and(|p| p <= 1.0)).collect();
    let slack = |r: &ErrorReport| r.phi.unwrap().exp_m1() / 2.0 - r.d_d;
    let violations = eligible.iter().filter(|r| slack(r) < -1e-9).count();
    let worst = eligible.iter().map(|r| slack(r)).fold(f64::INFINITY, f64::min);
    let ratio = eligible
        .iter()
        .filter(|r| r.phi.unwrap() > 0.0)
        .map(|r| r.d_d / r.phi.unwrap())
        .fold(0.0_f64, f64::max);
    // Informational: the bounds that follow from ‖[A, ρ]‖₁ ≤ 2‖A‖.
    let doubled = eligible
        .iter()
        .map(|r| (2.0 * r.phi.unwrap()).exp_m1() / 2.0 - r.d_d)
        .fold(f64::INFINITY, f64::min);
    let linear = eligible.iter().map(|r| r.phi.unwrap() - r.d_d).fold(f64::INFINITY, f64::min);
    println!(
        "    info: min slack of d_D ≤ (e^(2Φ)−1)/2 is {doubled:.3e}; min slack of d_D ≤ Φ is {linear:.3e}; max d_D/Φ = {ratio:.3}"
    );
    outcome(
        !eligible.is_empty() && violations == 0,
        format!(
            "{} runs with Φ ≤ 1, {violations} violate d_D ≤ (e^Φ−1)/2 + 1e-9, min slack {worst:.3e}",
            eligible.len()
        ),
    )
}

fn dd_scaling(rows: &[SweepRow]) -> Outcome {
    // Sweep order is n_B, then J, then τ: rows 5..10 are n_B = 1, J = 0.1.
    let ladder: Vec<&ErrorReport> = rows[5..10].iter().filter_map(|r| r.report.as_ref()).collect();
    let taus: Vec<f64> = ladder.iter().map(|r| r.tau).collect();
    let d: Vec<f64> = ladder.iter().map(|r| r.d_d).collect();
    let slope = loglog_slope(&taus, &d);

    let mut base = sweep_config();
    base.sweep = None;
    base.model.n_bath = 1;
    base.model.coupling = 0.1;
    base.protocol.group = GroupPreset::None;
    let baseline = run_experiment(&base).unwrap().report.d_d;
    let smallest = *d.last().unwrap();
    outcome(
        ladder.len() == 5 && (0.8..=2.2).contains(&slope) && smallest <= baseline / 5.0,
        format!(
            "slope {slope:.3} over τ = {taus:?} (band [0.8, 2.2]); d_D(τ_min) = {smallest:.3e}, no-DD d_D = {baseline:.3e}, ratio {:.3} (limit 0.2)",
            smallest / baseline
        ),
    )
}

fn adiabatic_scaling() -> Outcome {
    let spec = universal_2local(2, false, ScheduleKind::SmoothEndpoint, 10.0, 1.0).unwrap();
    let cfg = IntegratorConfig::with_tolerance(1e-12);
    let rs = [1.0, 2.0, 4.0, 8.0];
    let deltas: Vec<f64> = rs
        .iter()
        .map(|&r| run_closed_adiabatic(&spec, r, &cfg).unwrap().delta_ad)
        .collect();
    let slope = loglog_slope(&rs, &deltas);
    outcome(
        slope <= -1.5,
        format!(
            "δ_ad = [{}] for r = {rs:?}, slope {slope:.3} (limit -1.5)",
            deltas.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn penalty_spectrum() -> Outcome {
    let g = universal_group(4).unwrap();
    let k = g.order() as f64;
    let ep = 0.8;
    let hp = penalty_hamiltonian(&g, ep).unwrap();
    let (values, vectors) = eigh(&hp);
    let (code, _) = code_from_universal_group(4).unwrap();
    let mut worst = 0.0_f64;
    let mut lines = Vec::new();
    for q in 0..4 {
        for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
            let err = PauliString::single(4, q, letter);
            let a = anticommuting_count(&g, &err).unwrap() as f64;
            for word in code.codewords() {
                let psi = DVector::from_vec(err.apply(word.state.amplitudes().as_slice()).unwrap());
                let weights: Vec<f64> = (vectors.adjoint() * &psi).iter().map(|z| z.norm_sqr()).collect();
                let energy: f64 = weights.iter().zip(&values).map(|(w, e)| w * e).sum();
                let spread: f64 = weights.iter().zip(&values).map(|(w, e)| w * (e - energy).powi(2)).sum();
                let expected = -ep * (k - 1.0 - 2.0 * a);
                worst = worst.max((energy - expected).abs()).max(spread.sqrt());
            }
            if q == 0 {
                lines.push(format!(
                    "{err}: a={a}, E={:.3}, alternative a(K−1)E_P={:.3}",
                    -ep * (k - 1.0 - 2.0 * a),
                    a * (k - 1.0) * ep
                ));
            }
        }
    }
    for l in &lines {
        println!("    info: {l}");
    }
    outcome(
        worst <= 1e-12,
        format!("12 errors × 4 codewords, max |E − (−E_P(K−1−2a))| = {worst:.2e} (limit 1e-12)"),
    )
}

/// `(e^x − 1)/x − 1` by its Taylor series.
fn budget_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..40 {
        term *= x / (k + 1) as f64;
        sum += term;
    }
    sum
}

fn evaluators(reports: &[ErrorReport]) -> Outcome {
    let mut worst = 0.0_f64;
    // J = 0.1, T = 10, K = 4, L = 400, w = 0, β = 1: T_c = 0.1.
    let b = phi_budget(0.1, 10.0, 0.0, 0.025, 4, 400, 1.0, 1.0);
    worst = worst.max((b.term1 - 0.01).abs()).max(b.term2.abs());
    worst = worst.max((b.term3 - budget_series(0.2)).abs());
    // JT = 0.1 with T_c = 0.04 and L/K = 1.
    let b = phi_budget(2.5, 0.04, 0.0, 0.01, 4, 4, 1.0, 1.0);
    worst = worst.max((b.term1 - 0.01).abs());
    worst = worst.max((b.term3 - 0.1 * budget_series(0.08)).abs());
    let p = dd_error_prediction(&ScalingRule::new(1.0, 0.0, 1.5, 0.5).unwrap(), 4).unwrap();
    worst = worst.max((p.total - 1.125).abs());

    let alpha = calibrate_alpha(reports);
    let covered = reports.iter().all(|r| {
        let unit = phi_budget(r.j, r.t, r.w, r.tau, r.k, r.l, 0.0, 1.0).term1;
        r.phi.is_none_or(|phi| phi <= alpha * unit + r.budget.term2 + r.budget.term3 + 1e-12)
    });
    outcome(
        worst <= 1e-12 && alpha <= 10.0 && covered,
        format!("max evaluator error {worst:.2e} (limit 1e-12); calibrated α = {alpha:.4} (limit 10); Φ ≤ budget: {covered}"),
    )
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_default()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(
        &cfg_path,
        r#"
[model]
preset = "universal-2local"
coupling = 0.1
seed = 4

[protocol.explicit]
tau = 0.2
cycles = 3

[run]
tolerance = 1e-8

[sweep]
axes = [{ path = "model.coupling", values = [0.05, 0.1] }, { path = "protocol.explicit.tau", values = [0.2, 0.1] }]
"#,
    )
    .unwrap();
    let run = |args: &[&str], out: &str| {
        Command::new(BIN)
            .args(args)
            .arg(&cfg_path)
            .args(["--out-dir", dir.path().join(out).to_str().unwrap()])
            .env_remove("AQC_SHIELD_OUT")
            .status()
            .expect("run binary")
    };
    let s1 = run(&["simulate"], "a");
    let s2 = run(&["simulate"], "b");
    let files_equal = |x: &str, y: &str, name: &str| {
        let a = read(&dir.path().join(x).join(name));
        !a.is_empty() && a == read(&dir.path().join(y).join(name))
    };
    let simulate_ok = s1.code() == s2.code() && files_equal("a", "b", "report.csv") && files_equal("a", "b", "report.json");
    let p1 = run(&["sweep", "--parallel", "1"], "p1");
    let p4 = run(&["sweep", "--parallel", "4"], "p4");
    let rows = String::from_utf8(read(&dir.path().join("p1").join("sweep.csv"))).unwrap_or_default();
    let sweep_ok = p1.code() == p4.code()
        && files_equal("p1", "p4", "sweep.csv")
        && files_equal("p1", "p4", "sweep.json")
        && rows.lines().count() == 5;
    outcome(
        simulate_ok && sweep_ok,
        format!("simulate twice byte-identical: {simulate_ok}; sweep --parallel 1 vs 4 identical: {sweep_ok}"),
    )
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "codeword golden table", codewords()),
        (2, "decoupling annihilation", annihilation()),
        (3, "non-interference", non_interference()),
    ];

    let sweep = run_sweep(&sweep_config(), rayon::current_num_threads()).expect("sweep runs");
    let errors: Vec<String> = sweep
        .rows
        .iter()
        .filter(|r| r.report.is_none())
        .map(|r| format!("point {}: {}", r.index, r.status))
        .collect();
    if !errors.is_empty() {
        println!("sweep errors: {errors:?}");
    }
    let reports: Vec<ErrorReport> = sweep.rows.iter().filter_map(|r| r.report.clone()).collect();
    println!("protected sweep: {} runs in {:.1}s", reports.len(), start.elapsed().as_secs_f64());

    results.push((4, "bound chain", bound_chain(&reports)));
    results.push((5, "error phase vs distance", phase_relation(&reports)));
    results.push((6, "decoupling scaling in τ", dd_scaling(&sweep.rows)));
    results.push((7, "adiabatic scaling in r", adiabatic_scaling()));
    results.push((8, "penalty spectrum", penalty_spectrum()));
    results.push((9, "budget and prediction evaluators", evaluators(&reports)));
    results.push((10, "determinism", determinism()));

    results.sort_by_key(|r| r.0);
    for (id, name, o) in &results {
        println!("{} criterion {id:>2} ({name}): {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed = results.iter().filter(|r| !r.2.passed).count();
    println!(
        "{}/{} criteria passed in {:.1}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
