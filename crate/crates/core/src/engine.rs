//! Time-ordered propagation, the interaction frame, effective Hamiltonians
//! and the coupled / uncoupled / closed runs of a protected computation.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::codes::{lifted_group_average, DecouplingGroup};
use crate::error::{Error, Result};
use crate::linalg::{
    c, commutator, eigh, expm_hermitian_unchecked, hermitian_part, hermiticity_deviation, identity, kron,
    logm_unitary, matmul, max_abs, op_norm, DensityMatrix, Matrix, StateVector,
};
use crate::metrics::trace_distance;
use crate::model::{h_ad, AdiabaticSpec, SystemBathSpec, DEGENERACY_GAP};
use crate::protocols::{PulseSchedule, Segment};

/// Per-step exponential integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MagnusOrder {
    /// Midpoint exponential.
    Second,
    /// Two-point Gauss-Legendre Magnus with one commutator.
    #[default]
    Fourth,
}

impl MagnusOrder {
    fn order(self) -> i32 {
        match self {
            MagnusOrder::Second => 2,
            MagnusOrder::Fourth => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Local error tolerance per accepted step (step-doubling estimate).
    pub tolerance: f64,
    /// Largest step as a fraction of the current segment length.
    pub max_step_fraction: f64,
    pub max_steps: usize,
    pub order: MagnusOrder,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_step_fraction: 1.0,
            max_steps: 200_000,
            order: MagnusOrder::Fourth,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::OutOfRange {
                name: "tolerance",
                value: self.tolerance,
                range: "(0, ∞)",
            });
        }
        if !(self.max_step_fraction > 0.0 && self.max_step_fraction <= 1.0) {
            return Err(Error::OutOfRange {
                name: "max_step_fraction",
                value: self.max_step_fraction,
                range: "(0, 1]",
            });
        }
        Ok(())
    }
}

/// A timeline element: smooth evolution over a segment, or an instantaneous
/// unitary kick (index into the kick list).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Evolve(Segment),
    Kick(usize),
}

/// Accepted step points of every `Evolve` piece, in order. Replaying a grid
/// reproduces the exact sequence of exponentials.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Grid {
    pub points: Vec<Vec<f64>>,
}

impl Grid {
    pub fn num_steps(&self) -> usize {
        self.points.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub max_step: f64,
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub unitary: Matrix,
    pub grid: Grid,
    pub diagnostics: Diagnostics,
}

fn checked_sample<H>(h: &H, t: f64, seg: &Segment) -> Result<Matrix>
where
    H: Fn(f64, &Segment) -> Matrix,
{
    let m = h(t, seg);
    let dev = hermiticity_deviation(&m);
    if dev > 1e-10 * max_abs(&m).max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(m)
}

/// Exponential of one Magnus step from `t0` to `t1`.
fn magnus_step<H>(h: &H, seg: &Segment, t0: f64, t1: f64, order: MagnusOrder) -> Result<Matrix>
where
    H: Fn(f64, &Segment) -> Matrix,
{
    let dt = t1 - t0;
    let heff = match order {
        MagnusOrder::Second => checked_sample(h, t0 + 0.5 * dt, seg)?,
        MagnusOrder::Fourth => {
            let off = 3f64.sqrt() / 6.0;
            let h1 = checked_sample(h, t0 + (0.5 - off) * dt, seg)?;
            let h2 = checked_sample(h, t0 + (0.5 + off) * dt, seg)?;
            let comm = commutator(&h1, &h2);
            let mut m = (h1 + h2) * c(0.5);
            m += comm * Complex64::new(0.0, 3f64.sqrt() / 12.0 * dt);
            hermitian_part(&m)
        }
    };
    Ok(expm_hermitian_unchecked(&heff, dt))
}

/// Time-ordered propagator over a timeline with adaptive step doubling.
/// `h(t, segment)` is the Hamiltonian inside `segment`; steps never cross
/// segment boundaries.
pub fn propagate_pieces<H>(
    dim: usize,
    pieces: &[Piece],
    kicks: &[Matrix],
    h: H,
    cfg: &IntegratorConfig,
) -> Result<Propagation>
where
    H: Fn(f64, &Segment) -> Matrix,
{
    cfg.validate()?;
    let exponent = 1.0 / (cfg.order.order() + 1) as f64;
    let mut u = identity(dim);
    let mut grid = Grid::default();
    let mut diag = Diagnostics {
        min_step: f64::INFINITY,
        ..Default::default()
    };
    let mut h_prev = f64::INFINITY;
    for piece in pieces {
        let seg = match piece {
            Piece::Kick(k) => {
                u = matmul(&kicks[*k], &u);
                continue;
            }
            Piece::Evolve(seg) => *seg,
        };
        let length = seg.end - seg.start;
        let mut points = Vec::new();
        if length <= 0.0 {
            grid.points.push(points);
            continue;
        }
        let h_max = cfg.max_step_fraction * length;
        let mut step = h_prev.min(h_max);
        let mut t = seg.start;
        while t < seg.end {
            if diag.accepted + diag.rejected >= cfg.max_steps {
                return Err(Error::StepCapExceeded(cfg.max_steps));
            }
            let last = seg.end - t <= step * (1.0 + 1e-9);
            let t1 = if last { seg.end } else { t + step };
            let tm = 0.5 * (t + t1);
            let big = magnus_step(&h, &seg, t, t1, cfg.order)?;
            let first = magnus_step(&h, &seg, t, tm, cfg.order)?;
            let second = magnus_step(&h, &seg, tm, t1, cfg.order)?;
            let fine = matmul(&second, &first);
            let err = max_abs(&(&fine - big));
            let taken = t1 - t;
            let factor = if err == 0.0 {
                4.0
            } else {
                (0.9 * (cfg.tolerance / err).powf(exponent)).clamp(0.2, 4.0)
            };
            if err <= cfg.tolerance {
                u = matmul(&fine, &u);
                points.push(tm);
                points.push(t1);
                diag.accepted += 1;
                diag.min_step = diag.min_step.min(taken);
                diag.max_step = diag.max_step.max(taken);
                t = t1;
                // A snapped final step says nothing about the natural size.
                if !last || factor < 1.0 {
                    step = (taken * factor).min(h_max);
                }
            } else {
                diag.rejected += 1;
                step = taken * factor;
            }
        }
        h_prev = step;
        grid.points.push(points);
    }
    if diag.accepted == 0 {
        diag.min_step = 0.0;
    }
    Ok(Propagation {
        unitary: u,
        grid,
        diagnostics: diag,
    })
}

/// Replays a recorded grid: one exponential per recorded interval.
pub fn propagate_on_grid<H>(
    dim: usize,
    pieces: &[Piece],
    kicks: &[Matrix],
    grid: &Grid,
    h: H,
    order: MagnusOrder,
) -> Result<Matrix>
where
    H: Fn(f64, &Segment) -> Matrix,
{
    let mut u = identity(dim);
    let mut evolve_index = 0;
    for piece in pieces {
        match piece {
            Piece::Kick(k) => u = matmul(&kicks[*k], &u),
            Piece::Evolve(seg) => {
                let points = grid.points.get(evolve_index).ok_or(Error::LengthMismatch {
                    left: grid.points.len(),
                    right: evolve_index + 1,
                })?;
                evolve_index += 1;
                let mut t = seg.start;
                // Steps were recorded in pairs; multiply each pair before
                // applying it, as the adaptive pass did.
                for pair in points.chunks(2) {
                    let mut local = identity(dim);
                    for &t1 in pair {
                        local = matmul(&magnus_step(&h, seg, t, t1, order)?, &local);
                        t = t1;
                    }
                    u = matmul(&local, &u);
                }
            }
        }
    }
    Ok(u)
}

/// `T exp(−i ∫₀ᵀ H(t) dt)` for a smooth `H` on `[0, T]`.
pub fn propagate<H>(dim: usize, h: H, total_time: f64, cfg: &IntegratorConfig) -> Result<Propagation>
where
    H: Fn(f64) -> Matrix,
{
    if !(total_time >= 0.0) {
        return Err(Error::OutOfRange {
            name: "total_time",
            value: total_time,
            range: "[0, ∞)",
        });
    }
    let pieces = [Piece::Evolve(Segment {
        start: 0.0,
        end: total_time,
        pulse: None,
    })];
    propagate_pieces(dim, &pieces, &[], |t, _| h(t), cfg)
}

/// Ground state of `H_ad(s)` (within the code space when encoded, then
/// lifted). The largest-magnitude amplitude is made real positive.
pub fn instantaneous_ground_state(spec: &AdiabaticSpec, s: f64) -> Result<StateVector> {
    let h = spec.restrict(&h_ad(spec, s)?);
    let (values, vectors) = eigh(&h);
    if values.len() > 1 && values[1] - values[0] < DEGENERACY_GAP {
        return Err(Error::Degenerate {
            s,
            gap: values[1] - values[0],
        });
    }
    let v: DVector<Complex64> = vectors.column(0).into_owned();
    Ok(StateVector::normalized(spec.lift_vector(&v))?.with_canonical_phase())
}

#[derive(Debug, Clone)]
pub struct ClosedRun {
    pub psi: StateVector,
    pub delta_ad: f64,
    pub unitary: Matrix,
    pub diagnostics: Diagnostics,
}

/// Closed-system evolution under `H_ad(t/(rT))` for total time `rT`, started
/// in the ground state of `H_ad(0)`. Returns the final state and its trace
/// distance to the ground state of `H_ad(1)`.
pub fn run_closed_adiabatic(spec: &AdiabaticSpec, r: f64, cfg: &IntegratorConfig) -> Result<ClosedRun> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::OutOfRange {
            name: "r",
            value: r,
            range: "[1, ∞)",
        });
    }
    let psi0 = instantaneous_ground_state(spec, 0.0)?;
    let target = instantaneous_ground_state(spec, 1.0)?;
    let total = r * spec.total_time();
    let (h0, h1, kind) = (spec.h0(), spec.h1(), spec.schedule());
    let prop = propagate(
        spec.dim(),
        |t| {
            let f = kind.f((t / total).clamp(0.0, 1.0)).expect("clamped");
            h0 * c(1.0 - f) + h1 * c(f)
        },
        total,
        cfg,
    )?;
    let psi = psi0.evolve(&prop.unitary);
    let delta_ad = trace_distance(&psi.to_density(), &target.to_density())?;
    Ok(ClosedRun {
        psi,
        delta_ad,
        unitary: prop.unitary,
        diagnostics: prop.diagnostics,
    })
}

/// Energy penalty added to the system Hamiltonian.
#[derive(Debug, Clone)]
pub struct Penalty {
    pub hamiltonian: Matrix,
    /// Keep the penalty on inside finite-width pulse windows.
    pub during_pulses: bool,
}

/// Initial bath state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BathState {
    #[default]
    Mixed,
    Ground,
}

pub fn bath_initial_state(bath: &SystemBathSpec, kind: BathState) -> Result<DensityMatrix> {
    match kind {
        BathState::Mixed => Ok(DensityMatrix::maximally_mixed(bath.bath_dim())),
        BathState::Ground => {
            let (values, vectors) = eigh(bath.h_b());
            if values.len() > 1 && values[1] - values[0] < DEGENERACY_GAP {
                return Err(Error::Degenerate {
                    s: 0.0,
                    gap: values[1] - values[0],
                });
            }
            let v = StateVector::normalized(vectors.column(0).into_owned())?;
            Ok(v.to_density())
        }
    }
}

/// Outputs of one joint (system ⊗ bath) run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub u_total: Matrix,
    pub rho_final: DensityMatrix,
    pub rho_s_final: DensityMatrix,
    /// Interaction-frame effective Hamiltonian; `None` when the frame
    /// propagator has an eigenphase on the branch cut.
    pub h_eff: Option<Matrix>,
    pub phi: Option<f64>,
    pub diagnostics: Diagnostics,
}

/// Everything produced by [`run_protected`].
#[derive(Debug, Clone)]
pub struct ProtectedRun {
    pub coupled: RunArtifacts,
    pub uncoupled: RunArtifacts,
    /// Closed adiabatic evolution (with penalty, without pulses) replayed on
    /// the coupled run's grid.
    pub closed: ClosedRun,
    /// Ground state of `H_ad(1)` as a density matrix.
    pub ideal_system: DensityMatrix,
    pub rho_b_initial: DensityMatrix,
    pub u_b: Matrix,
    pub total_time: f64,
}

impl ProtectedRun {
    /// `ideal_system ⊗ U_B ρ_B U_B†`.
    pub fn ideal_joint(&self) -> DensityMatrix {
        self.ideal_system.tensor(&self.rho_b_initial.evolve(&self.u_b))
    }
}

/// Inputs of a protected run.
#[derive(Debug, Clone, Copy)]
pub struct ProtectedModel<'a> {
    pub spec: &'a AdiabaticSpec,
    pub bath: &'a SystemBathSpec,
    pub penalty: Option<&'a Penalty>,
}

/// Evolution segments of a schedule, with a kick after every slot when the
/// pulses are ideal.
fn timeline(schedule: &PulseSchedule) -> Vec<Piece> {
    let ideal = schedule.is_ideal();
    let mut pieces = Vec::new();
    for (slot, seg) in schedule.segments().into_iter().enumerate() {
        pieces.push(Piece::Evolve(seg));
        if ideal {
            pieces.push(Piece::Kick(slot % schedule.k()));
        }
    }
    pieces
}

/// Runs the coupled evolution under
/// `H(t) = (H_ad + H_P + H_C(t)) ⊗ I + I ⊗ H_B + H_SB`, the uncoupled twin
/// (`H_SB` removed) and the closed adiabatic evolution, all on the grid
/// chosen adaptively for the coupled run. The system starts in the ground
/// state of `H_ad(0)`, the bath in `bath_initial`.
pub fn run_protected(
    model: ProtectedModel<'_>,
    schedule: &PulseSchedule,
    bath_initial: &DensityMatrix,
    cfg: &IntegratorConfig,
) -> Result<ProtectedRun> {
    let ProtectedModel { spec, bath, penalty } = model;
    let n = spec.num_qubits();
    if bath.num_system_qubits() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: bath.num_system_qubits(),
        });
    }
    if schedule.group().num_qubits() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: schedule.group().num_qubits(),
        });
    }
    if bath_initial.dim() != bath.bath_dim() {
        return Err(Error::DimensionMismatch {
            expected: bath.bath_dim(),
            got: bath_initial.dim(),
        });
    }
    let total = schedule.total_time();
    if (spec.total_time() - total).abs() > 1e-9 * total {
        return Err(Error::InvalidParameter(format!(
            "adiabatic runtime {} differs from the schedule length {}",
            spec.total_time(),
            total
        )));
    }
    let dim_s = spec.dim();
    let dim_b = bath.bath_dim();
    let id_b = identity(dim_b);
    let id_s = identity(dim_s);
    let lift = |m: &Matrix| kron(m, &id_b);

    let kind = spec.schedule();
    let f_at = |t: f64| kind.f((t / total).clamp(0.0, 1.0)).expect("clamped");
    let h_p = penalty.map(|p| p.hamiltonian.clone()).unwrap_or_else(|| Matrix::zeros(dim_s, dim_s));
    let penalty_in_windows = penalty.is_none_or(|p| p.during_pulses);
    let windows: Vec<Matrix> = schedule.generators().to_vec();
    let kicks_s: Vec<Matrix> = schedule
        .pulses()
        .iter()
        .map(|p| p.to_dense())
        .collect::<Result<_>>()?;

    // System Hamiltonian, with or without controls.
    let system_h = |t: f64, seg: &Segment, controls: bool| -> Matrix {
        let f = f_at(t);
        let mut m = spec.h0() * c(1.0 - f) + spec.h1() * c(f);
        match seg.pulse {
            Some(k) if controls => {
                m += &windows[k];
                if penalty_in_windows {
                    m += &h_p;
                }
            }
            _ => m += &h_p,
        }
        m
    };

    let pieces = timeline(schedule);

    // Coupled run on the joint space.
    let h0_j = lift(spec.h0());
    let h1_j = lift(spec.h1());
    let hp_j = lift(&h_p);
    let windows_j: Vec<Matrix> = windows.iter().map(lift).collect();
    let h_sb = bath.h_sb()?;
    let coupling_free = max_abs(&h_sb) == 0.0;
    let static_j = kron(&id_s, bath.h_b()) + &h_sb;
    let kicks_j: Vec<Matrix> = kicks_s.iter().map(lift).collect();
    let joint_h = |t: f64, seg: &Segment| -> Matrix {
        let f = f_at(t);
        let mut m = &h0_j * c(1.0 - f) + &h1_j * c(f) + &static_j;
        match seg.pulse {
            Some(k) => {
                m += &windows_j[k];
                if penalty_in_windows {
                    m += &hp_j;
                }
            }
            None => m += &hp_j,
        }
        m
    };
    let coupled = propagate_pieces(dim_s * dim_b, &pieces, &kicks_j, joint_h, cfg)?;
    let grid = &coupled.grid;

    // Uncoupled twin: H_SB = 0 makes the dynamics factorize exactly.
    let u_b = expm_hermitian_unchecked(bath.h_b(), total);
    let u_uncoupled = if coupling_free {
        coupled.unitary.clone()
    } else {
        let u_sc = propagate_on_grid(dim_s, &pieces, &kicks_s, grid, |t, seg| system_h(t, seg, true), cfg.order)?;
        kron(&u_sc, &u_b)
    };

    // Closed evolution: no pulses, no kicks.
    let closed_pieces: Vec<Piece> = pieces.iter().filter(|p| matches!(p, Piece::Evolve(_))).copied().collect();
    let u_ad = propagate_on_grid(dim_s, &closed_pieces, &[], grid, |t, seg| system_h(t, seg, false), cfg.order)?;

    let psi0 = instantaneous_ground_state(spec, 0.0)?;
    let target = instantaneous_ground_state(spec, 1.0)?;
    let ideal_system = target.to_density();
    let psi_closed = psi0.evolve(&u_ad);
    let delta_ad = trace_distance(&psi_closed.to_density(), &ideal_system)?;

    let rho0 = psi0.to_density().tensor(bath_initial);
    let frame = kron(&u_ad, &u_b);
    let make = |u: Matrix, diagnostics: Diagnostics| -> Result<RunArtifacts> {
        let rho_final = rho0.evolve(&u);
        let rho_s_final = rho_final.partial_trace(&[dim_s, dim_b], &[0])?;
        let u_tilde = interaction_frame(&u, &frame)?;
        let (h_eff, phi) = match effective_hamiltonian(&u_tilde, total) {
            Ok((h, phi)) => (Some(h), Some(phi)),
            Err(Error::BranchCut { .. }) => (None, None),
            Err(e) => return Err(e),
        };
        Ok(RunArtifacts {
            u_total: u,
            rho_final,
            rho_s_final,
            h_eff,
            phi,
            diagnostics,
        })
    };
    let coupled_art = make(coupled.unitary.clone(), coupled.diagnostics)?;
    let uncoupled_art = if coupling_free {
        coupled_art.clone()
    } else {
        make(u_uncoupled, coupled.diagnostics)?
    };
    Ok(ProtectedRun {
        coupled: coupled_art,
        uncoupled: uncoupled_art,
        closed: ClosedRun {
            psi: psi_closed,
            delta_ad,
            unitary: u_ad,
            diagnostics: coupled.diagnostics,
        },
        ideal_system,
        rho_b_initial: bath_initial.clone(),
        u_b,
        total_time: total,
    })
}

/// `Ũ = (U_ad ⊗ U_B)† U`, with `frame = U_ad ⊗ U_B`.
pub fn interaction_frame(u_total: &Matrix, frame: &Matrix) -> Result<Matrix> {
    if u_total.shape() != frame.shape() {
        return Err(Error::DimensionMismatch {
            expected: frame.nrows(),
            got: u_total.nrows(),
        });
    }
    Ok(frame.adjoint() * u_total)
}

/// `H_eff` with `Ũ = e^{−iT H_eff}` after removing the global phase of
/// `tr Ũ`, and `Φ = T‖H_eff‖`.
pub fn effective_hamiltonian(u_tilde: &Matrix, total_time: f64) -> Result<(Matrix, f64)> {
    if !(total_time > 0.0) {
        return Err(Error::OutOfRange {
            name: "total_time",
            value: total_time,
            range: "(0, ∞)",
        });
    }
    let tr = u_tilde.trace();
    let canonical = if tr.norm() > 1e-12 * u_tilde.nrows() as f64 {
        u_tilde * (tr.conj() / c(tr.norm()))
    } else {
        u_tilde.clone()
    };
    let log = logm_unitary(&canonical)?;
    let phi = op_norm(&log);
    Ok((log * c(1.0 / total_time), phi))
}

/// First-order Magnus term of ideal PDD: the bath-lifted group average.
pub fn magnus_first_order(g: &DecouplingGroup, h_sb: &Matrix) -> Result<Matrix> {
    let dim_s = 1usize << g.num_qubits();
    if !h_sb.nrows().is_multiple_of(dim_s) || h_sb.nrows() != h_sb.ncols() {
        return Err(Error::DimensionMismatch {
            expected: dim_s,
            got: h_sb.nrows(),
        });
    }
    lifted_group_average(g, h_sb, h_sb.nrows() / dim_s)
}
