//! Hamiltonians: the adiabatic interpolation, the 2-local universal AQC
//! family, the linear-decoherence system-bath coupling, and gap analysis.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{encode_hamiltonian, StabilizerCode};
use crate::error::{Error, Result};
use crate::linalg::{c, eigvalsh, hermitian_part, kron, op_norm, Matrix};
use crate::pauli::{Pauli, PauliString, Phase};

pub type Terms = Vec<(f64, PauliString)>;

/// Interpolation schedule `f(s)` with `f(0) = 0`, `f(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Linear,
    /// `s − sin(2πs)/(2π)`: first derivative vanishes at both ends.
    #[default]
    SmoothEndpoint,
    /// `10s³ − 15s⁴ + 6s⁵`: first and second derivatives vanish at both ends.
    PolynomialSmooth,
}

impl ScheduleKind {
    /// `(f, f′, f″)` at `s`.
    pub fn eval(self, s: f64) -> Result<(f64, f64, f64)> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::OutOfRange {
                name: "s",
                value: s,
                range: "[0, 1]",
            });
        }
        Ok(match self {
            ScheduleKind::Linear => (s, 1.0, 0.0),
            ScheduleKind::SmoothEndpoint => {
                let w = 2.0 * PI * s;
                (s - w.sin() / (2.0 * PI), 1.0 - w.cos(), 2.0 * PI * w.sin())
            }
            ScheduleKind::PolynomialSmooth => {
                let (s2, s3) = (s * s, s * s * s);
                (
                    10.0 * s3 - 15.0 * s3 * s + 6.0 * s3 * s2,
                    30.0 * s2 - 60.0 * s3 + 30.0 * s2 * s2,
                    60.0 * s - 180.0 * s2 + 120.0 * s3,
                )
            }
        })
    }

    pub fn f(self, s: f64) -> Result<f64> {
        self.eval(s).map(|v| v.0)
    }
}

/// Dense form of a real-coefficient term list on `n` qubits. String phases
/// must be `±1`.
pub fn terms_to_dense(n: usize, terms: &[(f64, PauliString)]) -> Result<Matrix> {
    let dim = 1usize << n;
    let mut m = Matrix::zeros(dim, dim);
    for (coef, p) in terms {
        if p.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: p.len(),
            });
        }
        if !p.is_hermitian() {
            return Err(Error::NotHermitian { deviation: coef.abs() });
        }
        m += p.to_dense()? * c(*coef);
    }
    Ok(m)
}

/// `H_ad(s) = (1 − f(s)) H₀ + f(s) H₁` on `n` qubits, optionally restricted
/// to the code space of a stabilizer code.
#[derive(Debug, Clone)]
pub struct AdiabaticSpec {
    n: usize,
    h0: Terms,
    h1: Terms,
    schedule: ScheduleKind,
    total_time: f64,
    delta0: f64,
    code: Option<StabilizerCode>,
    h0_dense: Matrix,
    h1_dense: Matrix,
}

impl AdiabaticSpec {
    pub fn new(
        n: usize,
        h0: Terms,
        h1: Terms,
        schedule: ScheduleKind,
        total_time: f64,
        delta0: f64,
    ) -> Result<Self> {
        if !(total_time > 0.0) || !total_time.is_finite() {
            return Err(Error::OutOfRange {
                name: "total_time",
                value: total_time,
                range: "(0, ∞)",
            });
        }
        if !(delta0 > 0.0) {
            return Err(Error::OutOfRange {
                name: "delta0",
                value: delta0,
                range: "(0, ∞)",
            });
        }
        let h0_dense = terms_to_dense(n, &h0)?;
        let h1_dense = terms_to_dense(n, &h1)?;
        Ok(Self {
            n,
            h0,
            h1,
            schedule,
            total_time,
            delta0,
            code: None,
            h0_dense,
            h1_dense,
        })
    }

    /// Restricts ground states and spectra to the code space of `code`.
    pub fn with_code(mut self, code: StabilizerCode) -> Result<Self> {
        if code.num_physical() != self.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: code.num_physical(),
            });
        }
        self.code = Some(code);
        Ok(self)
    }

    pub fn with_total_time(mut self, total_time: f64) -> Result<Self> {
        if !(total_time > 0.0) {
            return Err(Error::OutOfRange {
                name: "total_time",
                value: total_time,
                range: "(0, ∞)",
            });
        }
        self.total_time = total_time;
        Ok(self)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn h0_terms(&self) -> &[(f64, PauliString)] {
        &self.h0
    }

    pub fn h1_terms(&self) -> &[(f64, PauliString)] {
        &self.h1
    }

    pub fn h0(&self) -> &Matrix {
        &self.h0_dense
    }

    pub fn h1(&self) -> &Matrix {
        &self.h1_dense
    }

    pub fn schedule(&self) -> ScheduleKind {
        self.schedule
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn code(&self) -> Option<&StabilizerCode> {
        self.code.as_ref()
    }

    /// Compresses an operator onto the code space (identity map when
    /// unencoded).
    pub fn restrict(&self, m: &Matrix) -> Matrix {
        match &self.code {
            Some(code) => {
                let v = code.isometry();
                v.adjoint() * m * v
            }
            None => m.clone(),
        }
    }

    /// Maps a code-space vector back to the physical space.
    pub fn lift_vector(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        match &self.code {
            Some(code) => code.isometry() * v,
            None => v.clone(),
        }
    }

    /// Every Pauli string appearing in `H₀` or `H₁`.
    pub fn all_terms(&self) -> impl Iterator<Item = &PauliString> {
        self.h0.iter().chain(&self.h1).map(|(_, p)| p)
    }
}

/// `H_ad(s)`.
pub fn h_ad(spec: &AdiabaticSpec, s: f64) -> Result<Matrix> {
    let f = spec.schedule.f(s)?;
    Ok(spec.h0() * c(1.0 - f) + spec.h1() * c(f))
}

/// Coefficient of a universal-AQC term as a function of `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Coefficient {
    Constant(f64),
    /// `(1 − s)·start + s·end`.
    Ramp { start: f64, end: f64 },
}

impl Coefficient {
    pub fn at(self, s: f64) -> f64 {
        match self {
            Coefficient::Constant(v) => v,
            Coefficient::Ramp { start, end } => (1.0 - s) * start + s * end,
        }
    }
}

/// `h_i^α σ_i^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldTerm {
    pub qubit: usize,
    pub axis: Pauli,
    pub coefficient: Coefficient,
}

/// `J_ij^α σ_i^α σ_j^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingTerm {
    pub i: usize,
    pub j: usize,
    pub axis: Pauli,
    pub coefficient: Coefficient,
}

fn check_axis(axis: Pauli) -> Result<()> {
    match axis {
        Pauli::X | Pauli::Z => Ok(()),
        other => Err(Error::Unsupported(format!(
            "axis {} is not part of the XZ universal family",
            other.as_char()
        ))),
    }
}

/// Term list `Σ h_i^α σ_i^α + Σ J_ij^α σ_i^α σ_j^α` (α ∈ {x, z}) at `s`.
/// Zero coefficients are dropped.
pub fn universal_aqc_terms(
    n: usize,
    fields: &[FieldTerm],
    couplings: &[CouplingTerm],
    s: f64,
) -> Result<Terms> {
    let mut out = Vec::new();
    for t in fields {
        check_axis(t.axis)?;
        if t.qubit >= n {
            return Err(Error::InvalidParameter(format!("qubit {} out of range", t.qubit)));
        }
        let v = t.coefficient.at(s);
        if v != 0.0 {
            out.push((v, PauliString::single(n, t.qubit, t.axis)));
        }
    }
    for t in couplings {
        check_axis(t.axis)?;
        if t.i >= n || t.j >= n || t.i == t.j {
            return Err(Error::InvalidParameter(format!("bad coupling pair ({}, {})", t.i, t.j)));
        }
        let v = t.coefficient.at(s);
        if v != 0.0 {
            out.push((v, PauliString::on(n, &[t.i, t.j], t.axis)));
        }
    }
    Ok(out)
}

/// Logical `(H₀, H₁)` of the `universal-2local` preset on `m` qubits:
/// a transverse field `H₀ = −Σ σ^x` and an XZ Ising problem `H₁` with
/// alternating longitudinal fields and nearest-neighbour `ZZ`, `XX` bonds.
pub fn universal_preset(m: usize) -> Result<(Terms, Terms)> {
    if m == 0 {
        return Err(Error::InvalidParameter("preset needs at least one logical qubit".into()));
    }
    let driver: Vec<FieldTerm> = (0..m)
        .map(|q| FieldTerm {
            qubit: q,
            axis: Pauli::X,
            coefficient: Coefficient::Constant(-1.0),
        })
        .collect();
    let fields: Vec<FieldTerm> = (0..m)
        .map(|q| {
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            FieldTerm {
                qubit: q,
                axis: Pauli::Z,
                coefficient: Coefficient::Constant(sign * (0.9 - 0.15 * q as f64)),
            }
        })
        .collect();
    let couplings: Vec<CouplingTerm> = (0..m.saturating_sub(1))
        .flat_map(|q| {
            [
                CouplingTerm {
                    i: q,
                    j: q + 1,
                    axis: Pauli::Z,
                    coefficient: Coefficient::Constant(0.5),
                },
                CouplingTerm {
                    i: q,
                    j: q + 1,
                    axis: Pauli::X,
                    coefficient: Coefficient::Constant(0.3),
                },
            ]
        })
        .collect();
    Ok((
        universal_aqc_terms(m, &driver, &[], 0.0)?,
        universal_aqc_terms(m, &fields, &couplings, 1.0)?,
    ))
}

/// The `universal-2local` preset on `n` physical qubits. Encoded instances
/// run on the `[[n, n−2, 2]]` code (`n − 2` logical qubits); unencoded ones
/// use all `n` qubits directly.
pub fn universal_2local(
    n: usize,
    encoded: bool,
    schedule: ScheduleKind,
    total_time: f64,
    delta0: f64,
) -> Result<AdiabaticSpec> {
    if encoded {
        let (code, _) = crate::codes::code_from_universal_group(n)?;
        let (h0, h1) = universal_preset(code.num_logical())?;
        let scale = |t: Terms| t.into_iter().map(|(v, p)| (v * delta0, p)).collect::<Terms>();
        AdiabaticSpec::new(
            n,
            encode_hamiltonian(n, &scale(h0))?,
            encode_hamiltonian(n, &scale(h1))?,
            schedule,
            total_time,
            delta0,
        )?
        .with_code(code)
    } else {
        let (h0, h1) = universal_preset(n)?;
        let scale = |t: Terms| t.into_iter().map(|(v, p)| (v * delta0, p)).collect::<Terms>();
        AdiabaticSpec::new(n, scale(h0), scale(h1), schedule, total_time, delta0)
    }
}

/// System-bath model `H_SB = Σ_α S_α ⊗ B_α` plus bath Hamiltonian `H_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemBathSpec {
    n: usize,
    n_bath: usize,
    couplings: Vec<(PauliString, Matrix)>,
    h_b: Matrix,
    coupling_strength: f64,
    bath_norm: f64,
    seed: u64,
}

impl SystemBathSpec {
    pub fn num_system_qubits(&self) -> usize {
        self.n
    }

    pub fn num_bath_qubits(&self) -> usize {
        self.n_bath
    }

    pub fn bath_dim(&self) -> usize {
        1 << self.n_bath
    }

    pub fn joint_dim(&self) -> usize {
        1 << (self.n + self.n_bath)
    }

    pub fn couplings(&self) -> &[(PauliString, Matrix)] {
        &self.couplings
    }

    pub fn h_b(&self) -> &Matrix {
        &self.h_b
    }

    /// `J = ‖H_SB‖`.
    pub fn coupling_strength(&self) -> f64 {
        self.coupling_strength
    }

    /// `β_B = ‖H_B‖`.
    pub fn bath_norm(&self) -> f64 {
        self.bath_norm
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Assembled `H_SB` on system ⊗ bath.
    pub fn h_sb(&self) -> Result<Matrix> {
        let dim = self.joint_dim();
        let mut m = Matrix::zeros(dim, dim);
        for (s, b) in &self.couplings {
            m += kron(&s.to_dense()?, b);
        }
        Ok(m)
    }
}

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> Matrix {
    let a = Matrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    hermitian_part(&a)
}

/// Random 2-local Hermitian operator on `n` qubits with Gaussian weights.
fn random_two_local(rng: &mut ChaCha8Rng, n: usize) -> Result<Matrix> {
    let axes = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut terms = Vec::new();
    for q in 0..n {
        for &a in &axes {
            terms.push((rng.sample(StandardNormal), PauliString::single(n, q, a)));
        }
    }
    for q in 0..n {
        for r in q + 1..n {
            for &a in &axes {
                for &b in &axes {
                    let mut p = PauliString::single(n, q, a);
                    p = p.mul(&PauliString::single(n, r, b))?;
                    terms.push((rng.sample(StandardNormal), p.with_phase(Phase::ONE)));
                }
            }
        }
    }
    terms_to_dense(n, &terms)
}

/// Linear decoherence `H_SB = Σ_{α∈{x,y,z}} Σ_j σ_j^α ⊗ B_j^α` with seeded
/// random Hermitian bath factors, scaled so that `‖H_SB‖ = J`, and a seeded
/// random 2-local `H_B` scaled to `‖H_B‖ = β_B`.
pub fn linear_decoherence(
    n: usize,
    n_bath: usize,
    coupling_strength: f64,
    bath_norm: f64,
    seed: u64,
) -> Result<SystemBathSpec> {
    if n == 0 || n_bath == 0 {
        return Err(Error::InvalidParameter(format!(
            "need at least one system and one bath qubit (got {n}, {n_bath})"
        )));
    }
    for (name, v) in [("coupling", coupling_strength), ("bath_norm", bath_norm)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::OutOfRange {
                name,
                value: v,
                range: "[0, ∞)",
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bath_dim = 1usize << n_bath;
    let mut couplings = Vec::with_capacity(3 * n);
    for j in 0..n {
        for a in [Pauli::X, Pauli::Y, Pauli::Z] {
            couplings.push((PauliString::single(n, j, a), random_hermitian(&mut rng, bath_dim)));
        }
    }
    let mut spec = SystemBathSpec {
        n,
        n_bath,
        couplings,
        h_b: Matrix::zeros(bath_dim, bath_dim),
        coupling_strength,
        bath_norm,
        seed,
    };
    let raw = op_norm(&spec.h_sb()?);
    let scale = if raw > 0.0 { coupling_strength / raw } else { 0.0 };
    for (_, b) in &mut spec.couplings {
        *b *= c(scale);
    }
    let h_b = random_two_local(&mut rng, n_bath)?;
    let hb_norm = op_norm(&h_b);
    spec.h_b = if hb_norm > 0.0 {
        h_b * c(bath_norm / hb_norm)
    } else {
        h_b
    };
    Ok(spec)
}

/// Spectral norms entering the error-phase budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBounds {
    /// `max_s ‖H_ad(s)‖`.
    pub beta_s: f64,
    pub beta_b: f64,
    /// `max_s ‖H_ad(s) ⊗ I + I ⊗ H_B‖`.
    pub beta: f64,
}

/// Norms sampled on a uniform grid of `samples` points in `s`.
pub fn norm_bounds(spec: &AdiabaticSpec, h_b: &Matrix, samples: usize) -> Result<NormBounds> {
    let bath = eigvalsh(h_b);
    let (b_lo, b_hi) = (bath.first().copied().unwrap_or(0.0), bath.last().copied().unwrap_or(0.0));
    let beta_b = b_lo.abs().max(b_hi.abs());
    let mut beta_s = 0.0_f64;
    let mut beta = 0.0_f64;
    for k in 0..samples.max(2) {
        let s = k as f64 / (samples.max(2) - 1) as f64;
        let e = eigvalsh(&h_ad(spec, s)?);
        let (lo, hi) = (e[0], e[e.len() - 1]);
        beta_s = beta_s.max(lo.abs()).max(hi.abs());
        // Spectrum of A⊗I + I⊗B is {a_i + b_j}.
        beta = beta.max((lo + b_lo).abs()).max((hi + b_hi).abs());
    }
    Ok(NormBounds { beta_s, beta_b, beta })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub s: Vec<f64>,
    /// Ascending eigenvalues per grid point (code-space restricted when the
    /// spec carries a code).
    pub energies: Vec<Vec<f64>>,
    /// Minimal gap `E₁ − E₀`.
    pub gap: f64,
    pub s_star: f64,
    pub degenerate: bool,
}

fn spectrum_at(spec: &AdiabaticSpec, s: f64) -> Result<Vec<f64>> {
    Ok(eigvalsh(&spec.restrict(&h_ad(spec, s)?)))
}

fn gap_at(spec: &AdiabaticSpec, s: f64) -> Result<f64> {
    let e = spectrum_at(spec, s)?;
    Ok(if e.len() > 1 { e[1] - e[0] } else { f64::INFINITY })
}

/// Degeneracy threshold for the ground level.
pub const DEGENERACY_GAP: f64 = 1e-12;

/// Minimal spectral gap of `H_ad(s)` over a uniform grid, optionally
/// refined by golden-section search around the coarse minimum.
pub fn min_gap(spec: &AdiabaticSpec, grid_points: usize, refine: bool) -> Result<SpectralReport> {
    if grid_points < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least 2 points, got {grid_points}"
        )));
    }
    let s: Vec<f64> = (0..grid_points)
        .map(|k| k as f64 / (grid_points - 1) as f64)
        .collect();
    let energies: Vec<Vec<f64>> = s
        .par_iter()
        .map(|&x| spectrum_at(spec, x))
        .collect::<Result<_>>()?;
    let gaps: Vec<f64> = energies
        .iter()
        .map(|e| if e.len() > 1 { e[1] - e[0] } else { f64::INFINITY })
        .collect();
    let (mut k_min, mut gap) = (0, f64::INFINITY);
    for (k, &g) in gaps.iter().enumerate() {
        if g < gap {
            gap = g;
            k_min = k;
        }
    }
    let mut s_star = s[k_min];
    if refine && gap > DEGENERACY_GAP && gap.is_finite() {
        let lo = s[k_min.saturating_sub(1)];
        let hi = s[(k_min + 1).min(grid_points - 1)];
        let (sr, gr) = golden_section(|x| gap_at(spec, x), lo, hi, 1e-8)?;
        if gr < gap {
            gap = gr;
            s_star = sr;
        }
    }
    let degenerate = gap < DEGENERACY_GAP;
    if degenerate {
        gap = 0.0;
    }
    Ok(SpectralReport {
        s,
        energies,
        gap,
        s_star,
        degenerate,
    })
}

fn golden_section<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_deviation, max_abs};
    use rand::Rng;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn schedules_hit_endpoints() {
        for kind in [ScheduleKind::Linear, ScheduleKind::SmoothEndpoint, ScheduleKind::PolynomialSmooth] {
            assert_eq!(kind.f(0.0).unwrap(), 0.0);
            assert!((kind.f(1.0).unwrap() - 1.0).abs() < 1e-15);
            assert!(kind.eval(1.5).is_err());
            assert!(kind.eval(-0.1).is_err());
        }
        for kind in [ScheduleKind::SmoothEndpoint, ScheduleKind::PolynomialSmooth] {
            assert!(kind.eval(0.0).unwrap().1.abs() < 1e-15);
            assert!(kind.eval(1.0).unwrap().1.abs() < 1e-12);
        }
        assert!((ScheduleKind::SmoothEndpoint.f(0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn schedule_derivatives_match_finite_differences() {
        let h = 1e-5;
        for kind in [ScheduleKind::Linear, ScheduleKind::SmoothEndpoint, ScheduleKind::PolynomialSmooth] {
            for k in 1..=50 {
                let s = k as f64 / 51.0;
                let (_, d1, d2) = kind.eval(s).unwrap();
                let fp = kind.f(s + h).unwrap();
                let fm = kind.f(s - h).unwrap();
                assert!((d1 - (fp - fm) / (2.0 * h)).abs() <= 1e-6, "{kind:?} f′ at {s}");
                let (_, gp, _) = kind.eval(s + h).unwrap();
                let (_, gm, _) = kind.eval(s - h).unwrap();
                assert!((d2 - (gp - gm) / (2.0 * h)).abs() <= 1e-5, "{kind:?} f″ at {s}");
            }
        }
    }

    fn two_level() -> AdiabaticSpec {
        AdiabaticSpec::new(1, vec![(1.0, ps("X"))], vec![(1.0, ps("Z"))], ScheduleKind::Linear, 1.0, 1.0)
            .unwrap()
    }

    #[test]
    fn h_ad_endpoints_and_hermiticity() {
        let spec = universal_2local(4, true, ScheduleKind::SmoothEndpoint, 5.0, 1.0).unwrap();
        assert!(max_abs(&(h_ad(&spec, 0.0).unwrap() - spec.h0())) == 0.0);
        assert!(max_abs(&(h_ad(&spec, 1.0).unwrap() - spec.h1())) < 1e-15);
        let mut r = crate::linalg::testing::rng(4);
        for _ in 0..20 {
            let s: f64 = r.random_range(0.0..1.0);
            let h = h_ad(&spec, s).unwrap();
            assert!(hermiticity_deviation(&h) <= 1e-12);
            let f = spec.schedule().f(s).unwrap();
            assert!(op_norm(&h) <= (1.0 - f) * op_norm(spec.h0()) + f * op_norm(spec.h1()) + 1e-12);
        }
    }

    #[test]
    fn universal_terms() {
        assert!(universal_aqc_terms(2, &[], &[], 0.3).unwrap().is_empty());
        let zz = CouplingTerm {
            i: 0,
            j: 1,
            axis: Pauli::Z,
            coefficient: Coefficient::Constant(1.0),
        };
        assert_eq!(universal_aqc_terms(2, &[], &[zz], 0.0).unwrap(), vec![(1.0, ps("ZZ"))]);
        let bad = FieldTerm {
            qubit: 0,
            axis: Pauli::Y,
            coefficient: Coefficient::Constant(1.0),
        };
        assert!(matches!(
            universal_aqc_terms(2, &[bad], &[], 0.0),
            Err(Error::Unsupported(_))
        ));
        let ramp = FieldTerm {
            qubit: 1,
            axis: Pauli::X,
            coefficient: Coefficient::Ramp { start: 2.0, end: 0.0 },
        };
        assert_eq!(universal_aqc_terms(2, &[ramp], &[], 0.25).unwrap(), vec![(1.5, ps("IX"))]);
    }

    #[test]
    fn diagonal_instance_norm_is_coefficient_sum() {
        let f = |q, v| FieldTerm {
            qubit: q,
            axis: Pauli::Z,
            coefficient: Coefficient::Constant(v),
        };
        let cz = CouplingTerm {
            i: 0,
            j: 2,
            axis: Pauli::Z,
            coefficient: Coefficient::Constant(-0.4),
        };
        let terms = universal_aqc_terms(3, &[f(0, 0.5), f(1, -1.25)], &[cz], 0.0).unwrap();
        let m = terms_to_dense(3, &terms).unwrap();
        assert!(hermiticity_deviation(&m) == 0.0);
        // Brute force over basis states: all terms diagonal and commuting.
        let best = (0..8usize)
            .map(|b| {
                let z = |q: usize| -> f64 { if (b >> (2 - q)) & 1 == 0 { 1.0 } else { -1.0 } };
                (0.5 * z(0) - 1.25 * z(1) - 0.4 * z(0) * z(2)).abs()
            })
            .fold(0.0_f64, f64::max);
        assert!((op_norm(&m) - best).abs() < 1e-12);
        assert!((best - (0.5 + 1.25 + 0.4)).abs() < 1e-12);
    }

    #[test]
    fn linear_decoherence_contract() {
        let spec = linear_decoherence(1, 1, 0.3, 0.5, 9).unwrap();
        assert_eq!(spec.couplings().len(), 3);
        let letters: Vec<String> = spec.couplings().iter().map(|(s, _)| s.to_string()).collect();
        assert_eq!(letters, ["+X", "+Y", "+Z"]);
        assert!((op_norm(&spec.h_sb().unwrap()) - 0.3).abs() <= 1e-10);
        assert!((op_norm(spec.h_b()) - 0.5).abs() <= 1e-10);
        assert!(hermiticity_deviation(spec.h_b()) < 1e-14);

        let a = linear_decoherence(4, 2, 0.1, 0.5, 42).unwrap();
        let b = linear_decoherence(4, 2, 0.1, 0.5, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.couplings().len(), 12);
        assert!((op_norm(&a.h_sb().unwrap()) - 0.1).abs() <= 1e-10);
        let other = linear_decoherence(4, 2, 0.1, 0.5, 43).unwrap();
        assert_ne!(a, other);

        let zero = linear_decoherence(2, 1, 0.0, 0.5, 1).unwrap();
        assert_eq!(max_abs(&zero.h_sb().unwrap()), 0.0);
        assert!(linear_decoherence(0, 1, 0.1, 0.0, 1).is_err());
    }

    #[test]
    fn beta_is_subadditive() {
        let spec = universal_2local(4, true, ScheduleKind::SmoothEndpoint, 5.0, 1.0).unwrap();
        let bath = linear_decoherence(4, 2, 0.1, 0.7, 3).unwrap();
        let nb = norm_bounds(&spec, bath.h_b(), 21).unwrap();
        assert!(nb.beta <= nb.beta_s + nb.beta_b + 1e-12);
        assert!((nb.beta_b - 0.7).abs() < 1e-10);
        // Direct check at one grid point against the assembled joint operator.
        let h = h_ad(&spec, 0.5).unwrap();
        let joint = kron(&h, &Matrix::identity(4, 4)) + kron(&Matrix::identity(16, 16), bath.h_b());
        assert!(op_norm(&joint) <= nb.beta + 1e-12);
    }

    #[test]
    fn two_level_gap_matches_closed_form() {
        let report = min_gap(&two_level(), 41, true).unwrap();
        // gap(s) = 2√((1−s)² + s²), minimal √2 at s = 1/2.
        assert!((report.gap - 2f64.sqrt()).abs() < 1e-12);
        assert!((report.s_star - 0.5).abs() < 1e-6);
        for (s, e) in report.s.iter().zip(&report.energies) {
            let expected = 2.0 * ((1.0 - s).powi(2) + s * s).sqrt();
            assert!((e[1] - e[0] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_finds_off_grid_minimum() {
        let spec = AdiabaticSpec::new(
            1,
            vec![(1.0, ps("X"))],
            vec![(3.0, ps("Z"))],
            ScheduleKind::Linear,
            1.0,
            1.0,
        )
        .unwrap();
        // gap² = 4((1−s)² + 9s²) is minimal at s = 0.1.
        let coarse = min_gap(&spec, 8, false).unwrap();
        let fine = min_gap(&spec, 8, true).unwrap();
        assert!(fine.gap < coarse.gap);
        assert!((fine.s_star - 0.1).abs() < 1e-6);
        let exact = 2.0 * (0.81f64 + 9.0 * 0.01).sqrt();
        assert!((fine.gap - exact).abs() < 1e-10);
    }

    #[test]
    fn constant_hamiltonian_gap_and_degeneracy() {
        let spec = AdiabaticSpec::new(
            2,
            vec![(1.0, ps("ZI")), (0.25, ps("IZ"))],
            vec![(1.0, ps("ZI")), (0.25, ps("IZ"))],
            ScheduleKind::Linear,
            1.0,
            1.0,
        )
        .unwrap();
        let report = min_gap(&spec, 5, true).unwrap();
        assert!((report.gap - 0.5).abs() < 1e-12);
        assert!(min_gap(&spec, 1, false).is_err());

        let degenerate = AdiabaticSpec::new(2, vec![(1.0, ps("ZI"))], vec![(1.0, ps("ZI"))], ScheduleKind::Linear, 1.0, 1.0)
            .unwrap();
        let report = min_gap(&degenerate, 5, false).unwrap();
        assert!(report.degenerate);
        assert_eq!(report.gap, 0.0);
    }

    #[test]
    fn grid_doubling_is_converged_on_smooth_instance() {
        let spec = universal_2local(2, false, ScheduleKind::SmoothEndpoint, 1.0, 1.0).unwrap();
        let a = min_gap(&spec, 51, true).unwrap();
        let b = min_gap(&spec, 101, true).unwrap();
        assert!((a.gap - b.gap).abs() < 1e-6);
        assert!(a.gap > 0.1);
    }

    #[test]
    fn encoded_preset_gap_matches_logical_instance() {
        let enc = universal_2local(4, true, ScheduleKind::SmoothEndpoint, 1.0, 1.0).unwrap();
        let logical = universal_2local(2, false, ScheduleKind::SmoothEndpoint, 1.0, 1.0).unwrap();
        let a = min_gap(&enc, 41, true).unwrap();
        let b = min_gap(&logical, 41, true).unwrap();
        assert!((a.gap - b.gap).abs() < 1e-10);
        assert_eq!(a.energies[0].len(), 4);
    }
}
