//! Self-check suite: named property checks with measured values, limits and
//! margins.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codes::{
    anticommuting_count, code_from_universal_group, encode_hamiltonian, group_average, penalty_hamiltonian,
    syndrome_sectors, universal_group, DecouplingGroup,
};
use crate::engine::{propagate, BathState, IntegratorConfig};
use crate::error::Result;
use crate::linalg::{c, commutator, eigh, expm_hermitian, hermitian_part, identity, max_abs, op_norm, Matrix};
use crate::metrics::{dd_error_prediction, phi_budget};
use crate::model::{linear_decoherence, norm_bounds, universal_2local, ScheduleKind};
use crate::pauli::{Pauli, PauliString, Phase};
use crate::protocols::ScalingRule;

use super::{prepare, ExperimentConfig};

/// One named check: passes when `value ≤ limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
        }
    }

    pub fn passed(&self) -> bool {
        self.value <= self.limit
    }

    pub fn margin(&self) -> f64 {
        self.limit - self.value
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<44} value={:.3e} limit={:.3e} margin={:.3e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.limit,
            self.margin()
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteResult {
    pub checks: Vec<Check>,
}

impl SuiteResult {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            writeln!(f, "{check}")?;
        }
        let passed = self.checks.iter().filter(|c| c.passed()).count();
        write!(f, "{passed}/{} checks passed", self.checks.len())
    }
}

type Average<'a> = &'a dyn Fn(&DecouplingGroup, &Matrix) -> Result<Matrix>;

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> Matrix {
    hermitian_part(&Matrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }))
}

fn ket(bits: &str) -> DVector<Complex64> {
    let idx = usize::from_str_radix(bits, 2).expect("binary literal");
    let mut v = DVector::zeros(1 << bits.len());
    v[idx] = c(1.0);
    v
}

fn pauli_checks(out: &mut Vec<Check>) -> Result<()> {
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let strings: Vec<PauliString> = (0..16)
        .map(|k| PauliString::new(Phase::ONE, vec![letters[k / 4], letters[k % 4]]))
        .collect();
    let mut worst = 0.0_f64;
    let mut commute_err = 0usize;
    for a in &strings {
        let da = a.to_dense()?;
        for b in &strings {
            let db = b.to_dense()?;
            let prod = a.mul(b)?.to_dense()?;
            worst = worst.max(max_abs(&(prod - &da * &db)));
            let comm = max_abs(&commutator(&da, &db)) < 1e-12;
            if comm != a.commutes(b)? {
                commute_err += 1;
            }
        }
    }
    out.push(Check::new("pauli product matches dense product", worst, 1e-12));
    out.push(Check::new("pauli commutation matches dense commutator", commute_err as f64, 0.0));
    Ok(())
}

fn code_checks(out: &mut Vec<Check>, avg: Average<'_>) -> Result<()> {
    let (code, logicals) = code_from_universal_group(4)?;
    let table = [("0000", "1111"), ("0101", "1010"), ("0011", "1100"), ("0110", "1001")];
    let mut infidelity = 0.0_f64;
    for (word, (a, b)) in code.codewords().iter().zip(table) {
        let expected = (ket(a) + ket(b)) * c(std::f64::consts::FRAC_1_SQRT_2);
        let overlap = expected.dotc(word.state.amplitudes()).norm_sqr();
        infidelity = infidelity.max(1.0 - overlap);
    }
    out.push(Check::new("n=4 codewords match the golden table", infidelity, 1e-12));

    let g = universal_group(4)?;
    let mut invariance = 0.0_f64;
    for word in code.codewords() {
        let rho = word.state.to_density().into_matrix();
        invariance = invariance.max(max_abs(&(avg(&g, &rho)? - &rho)));
    }
    out.push(Check::new("codeword projectors are fixed by group average", invariance, 1e-12));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dense = g.dense_elements()?;
    let (mut idem, mut commutant) = (0.0_f64, 0.0_f64);
    for _ in 0..5 {
        let a = random_hermitian(&mut rng, 16);
        let pa = avg(&g, &a)?;
        idem = idem.max(max_abs(&(avg(&g, &pa)? - &pa)));
        for d in &dense {
            commutant = commutant.max(op_norm(&commutator(&pa, d)));
        }
    }
    out.push(Check::new("group average is idempotent", idem, 1e-12));
    out.push(Check::new("group average lands in the commutant", commutant, 1e-12));

    let mut annihilation = 0.0_f64;
    for n in [2, 4] {
        let g = universal_group(n)?;
        for seed in 0..10 {
            let bath = linear_decoherence(n, 1, 1.0, 1.0, seed)?;
            let h_sb = bath.h_sb()?;
            let lifted = crate::codes::lifted_group_average(&g, &h_sb, bath.bath_dim())?;
            annihilation = annihilation.max(op_norm(&lifted));
        }
    }
    out.push(Check::new("linear decoherence averages to zero", annihilation, 1e-12));

    let mut algebra = 0.0_f64;
    for (i, xi) in logicals.xbars.iter().enumerate() {
        let dx = xi.to_dense()?;
        for (j, zj) in logicals.zbars.iter().enumerate() {
            let dz = zj.to_dense()?;
            let r = if i == j { &dx * &dz + &dz * &dx } else { commutator(&dx, &dz) };
            algebra = algebra.max(max_abs(&r));
        }
    }
    out.push(Check::new("logical operators obey the Pauli algebra", algebra, 1e-12));

    let sectors = syndrome_sectors(&code)?;
    let sum = sectors.iter().fold(Matrix::zeros(16, 16), |acc, s| acc + &s.projector);
    let mut sector_err = max_abs(&(sum - identity(16)));
    for (i, a) in sectors.iter().enumerate() {
        for b in &sectors[i + 1..] {
            sector_err = sector_err.max(max_abs(&(&a.projector * &b.projector)));
        }
    }
    out.push(Check::new("syndrome sectors partition the space", sector_err, 1e-12));

    let ep = 0.5;
    let hp = penalty_hamiltonian(&g, ep)?;
    let mut penalty_err = 0.0_f64;
    for q in 0..4 {
        for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
            let err = PauliString::single(4, q, letter);
            let a = anticommuting_count(&g, &err)? as f64;
            let psi = DVector::from_vec(err.apply(code.codewords()[0].state.amplitudes().as_slice())?);
            let expected = -ep * (g.order() as f64 - 1.0 - 2.0 * a);
            penalty_err = penalty_err.max((&hp * &psi - &psi * c(expected)).norm());
        }
    }
    out.push(Check::new("penalty energy of single-qubit errors", penalty_err, 1e-12));
    Ok(())
}

fn model_checks(out: &mut Vec<Check>) -> Result<()> {
    let spec = universal_2local(4, true, ScheduleKind::SmoothEndpoint, 1.0, 1.0)?;
    let dense = universal_group(4)?.dense_elements()?;
    let mut interference = 0.0_f64;
    for k in 0..20 {
        let s = (k as f64 + 0.5) / 20.0;
        let h = crate::model::h_ad(&spec, s)?;
        for d in &dense {
            interference = interference.max(op_norm(&commutator(&h, d)));
        }
    }
    out.push(Check::new("encoded Hamiltonian commutes with the group", interference, 1e-12));

    let logical = [(1.0, "XI".parse()?), (1.0, "ZZ".parse()?), (1.0, "IX".parse()?)];
    let g = universal_group(4)?;
    let mut algebra = 0usize;
    for (_, term) in encode_hamiltonian(4, &logical)? {
        for el in g.elements() {
            if !term.commutes(el)? {
                algebra += 1;
            }
        }
    }
    out.push(Check::new("encoded terms commute with every group element", algebra as f64, 0.0));

    let mut deriv = 0.0_f64;
    let h = 1e-5;
    for kind in [ScheduleKind::Linear, ScheduleKind::SmoothEndpoint, ScheduleKind::PolynomialSmooth] {
        for k in 1..=50 {
            let s = k as f64 / 51.0;
            let fd = (kind.f(s + h)? - kind.f(s - h)?) / (2.0 * h);
            deriv = deriv.max((kind.eval(s)?.1 - fd).abs());
        }
    }
    out.push(Check::new("schedule derivative matches finite difference", deriv, 1e-6));

    let bath = linear_decoherence(4, 1, 0.1, 0.5, 1)?;
    let nb = norm_bounds(&spec, bath.h_b(), 21)?;
    out.push(Check::new("β ≤ β_S + β_B", nb.beta - nb.beta_s - nb.beta_b, 1e-12));
    Ok(())
}

fn engine_checks(out: &mut Vec<Check>) -> Result<()> {
    // Commuting time dependence: U = exp(−i(∫f)H).
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = random_hermitian(&mut rng, 4);
    let t = 1.3;
    let prop = propagate(4, |s| &h * c(1.0 + s * s), t, &IntegratorConfig::with_tolerance(1e-12))?;
    let exact = expm_hermitian(&h, t + t * t * t / 3.0)?;
    out.push(Check::new("propagator matches commuting oracle", max_abs(&(prop.unitary - exact)), 1e-9));

    let budget = phi_budget(0.1, 10.0, 0.0, 0.25, 4, 40, 0.5, 1.0);
    let x: f64 = 2.0 * 0.5 * 1.0;
    let term3 = 1.0 * (x.exp_m1() / x - 1.0);
    let budget_err = (budget.term1 - 0.1).abs() + budget.term2.abs() + (budget.term3 - term3).abs();
    out.push(Check::new("error-phase budget evaluator", budget_err, 1e-12));
    let pred = dd_error_prediction(&ScalingRule::new(2.0, 0.0, 2.0, 1.0)?, 4)?;
    out.push(Check::new("decoupling error prediction evaluator", (pred.total - 0.5625).abs(), 1e-12));

    let text = r#"
[model]
preset = "universal-2local"
coupling = 0.1
seed = 2
[protocol.explicit]
tau = 0.2
cycles = 4
[run]
tolerance = 1e-8
"#;
    let cfg = ExperimentConfig::parse(text)?;
    let exp = prepare(&cfg)?;
    let report = exp.run()?.report;
    out.push(Check::new("δ_S ≤ d_tot", -report.slack_monotonicity, 1e-9));
    out.push(Check::new("d_tot ≤ d_D + d_ad", -report.slack_triangle, 1e-9));
    out.push(Check::new("δ_S ≤ d_D + δ_ad", -report.slack_chain, 1e-9));
    if let Some(phi) = report.phi {
        out.push(Check::new("d_D ≤ (e^{2Φ} − 1)/2", report.d_d - (2.0 * phi).exp_m1() / 2.0, 1e-9));
    }

    let mut zero = cfg.clone();
    zero.model.coupling = 0.0;
    zero.run.bath_state = BathState::Ground;
    let d = prepare(&zero)?.run()?.report.d_d;
    out.push(Check::new("zero coupling gives zero distance", d, 0.0));
    Ok(())
}

/// Runs the suite with the library's group average.
pub fn verify() -> Result<SuiteResult> {
    verify_with(&group_average)
}

/// Runs the suite with a substitute group average, so that a faulty
/// implementation can be shown to fail the code checks.
pub fn verify_with(avg: Average<'_>) -> Result<SuiteResult> {
    let mut checks = Vec::new();
    pauli_checks(&mut checks)?;
    code_checks(&mut checks, avg)?;
    model_checks(&mut checks)?;
    engine_checks(&mut checks)?;
    // Spectrum sanity of the penalty: code space is the ground space.
    let hp = penalty_hamiltonian(&universal_group(4)?, 1.0)?;
    let (values, _) = eigh(&hp);
    checks.push(Check::new(
        "code space is the penalty ground space",
        (values[0] + 3.0).abs().max((values[3] + 3.0).abs()),
        1e-12,
    ));
    Ok(SuiteResult { checks })
}
