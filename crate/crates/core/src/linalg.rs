//! Dense complex-matrix kernel: Hermitian exponentials, principal unitary
//! logarithms, norms, partial traces, and the state types built on them.
//!
//! Exponentials and logarithms go through Hermitian eigendecompositions, so
//! they are exact to roundoff and the logarithm's branch is explicit.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<Complex64>;

/// Tolerance for structural checks (Hermiticity, unitarity, trace).
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Eigenphases closer than this to ±π are treated as lying on the branch cut.
pub const BRANCH_TOLERANCE: f64 = 1e-9;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> Matrix {
    Matrix::identity(dim, dim)
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `a · b` through a blocked complex GEMM kernel.
pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut out = Matrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return out;
    }
    // SAFETY: Complex64 is #[repr(C)] { re, im }, layout-identical to
    // [f64; 2]; all three buffers are dense column-major with the strides
    // given, and `out` does not alias the inputs.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr().cast(),
            1,
            m as isize,
            b.as_ptr().cast(),
            1,
            k as isize,
            [0.0, 0.0],
            out.as_mut_ptr().cast(),
            1,
            m as isize,
        );
    }
    out
}

pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    matmul(a, b) - matmul(b, a)
}

pub fn anticommutator(a: &Matrix, b: &Matrix) -> Matrix {
    matmul(a, b) + matmul(b, a)
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

fn check_square(m: &Matrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    Ok(())
}

pub fn hermiticity_deviation(m: &Matrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn unitarity_deviation(u: &Matrix) -> f64 {
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

/// Hermiticity check relative to the operator's own scale.
pub fn is_hermitian(m: &Matrix, tol: f64) -> bool {
    m.nrows() == m.ncols() && hermiticity_deviation(m) <= tol * max_abs(m).max(1.0)
}

pub fn is_unitary(u: &Matrix, tol: f64) -> bool {
    u.nrows() == u.ncols() && unitarity_deviation(u) <= tol
}

pub fn hermitian_part(m: &Matrix) -> Matrix {
    (m + m.adjoint()) * c(0.5)
}

/// Eigenvalues (ascending) and matching eigenvector columns of a Hermitian
/// matrix. Only the Hermitian part of the input is used.
pub fn eigh(m: &Matrix) -> (Vec<f64>, Matrix) {
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Matrix::from_fn(m.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigvalsh(m: &Matrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `V diag(values) V†`.
pub fn from_spectrum(values: &[Complex64], vectors: &Matrix) -> Matrix {
    let mut scaled = vectors.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= values[k];
    }
    matmul(&scaled, &vectors.adjoint())
}

/// Largest singular value.
pub fn op_norm(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if a.nrows() == a.ncols() && hermiticity_deviation(a) <= 1e-14 * max_abs(a).max(1e-300) {
        return eigvalsh(a).iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    }
    a.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |m, &x| m.max(x))
}

/// Sum of singular values, `Tr|A|`.
pub fn trace_norm(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if a.nrows() == a.ncols() && hermiticity_deviation(a) <= 1e-14 * max_abs(a).max(1e-300) {
        return eigvalsh(a).iter().map(|x| x.abs()).sum();
    }
    a.clone().singular_values().iter().sum()
}

/// `e^{−i t h}` for Hermitian `h`.
pub fn expm_hermitian(h: &Matrix, t: f64) -> Result<Matrix> {
    check_square(h)?;
    if !is_hermitian(h, DEFAULT_TOLERANCE) {
        return Err(Error::NotHermitian {
            deviation: hermiticity_deviation(h),
        });
    }
    Ok(expm_hermitian_unchecked(h, t))
}

/// As [`expm_hermitian`], without the Hermiticity check; the anti-Hermitian
/// part of `h` is discarded.
pub fn expm_hermitian_unchecked(h: &Matrix, t: f64) -> Matrix {
    let (values, vectors) = eigh(h);
    let phases: Vec<Complex64> = values
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -t * l))
        .collect();
    from_spectrum(&phases, &vectors)
}

fn wrap_phase(theta: f64) -> f64 {
    let mut x = theta % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// Eigenphases θ (with eigenvalues `e^{−iθ}`) and eigenvectors of a unitary,
/// through the Cayley transform `i(I−U)(I+U)^{-1}`, which is Hermitian with
/// eigenvalues `−tan(θ/2)`. Fails when `I+U` is singular.
fn cayley_eigenphases(u: &Matrix) -> Option<(Vec<f64>, Matrix)> {
    let dim = u.nrows();
    let id = identity(dim);
    let inv = (&id + u).try_inverse()?;
    let a = (&id - u) * inv * Complex64::new(0.0, 1.0);
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    let (lambdas, vectors) = eigh(&a);
    let thetas = lambdas.iter().map(|&l| -2.0 * l.atan()).collect();
    Some((thetas, vectors))
}

/// Eigenphases in `(−π, π]` and eigenvectors of a unitary. The unitary is
/// first rotated so that the widest gap in its spectrum sits on −1, which
/// keeps the Cayley inversion well conditioned.
pub fn unitary_eigenphases(u: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    check_square(u)?;
    let dev = unitarity_deviation(u);
    if dev > 1e-8 {
        return Err(Error::NotUnitary { deviation: dev });
    }
    // Rough phases from any rotation that avoids the exact singularity.
    let rough = [0.0, 1.0, 2.0, 3.0].iter().find_map(|&shift: &f64| {
        let rotated = u * Complex64::from_polar(1.0, shift);
        cayley_eigenphases(&rotated).map(|(t, _)| {
            t.into_iter().map(|x| wrap_phase(x + shift)).collect::<Vec<f64>>()
        })
    });
    let Some(mut rough) = rough else {
        return Err(Error::BranchCut { phase: PI });
    };
    rough.sort_by(f64::total_cmp);
    // Midpoint of the widest circular gap.
    let mut best_gap = 2.0 * PI - (rough[rough.len() - 1] - rough[0]);
    let mut mid = wrap_phase(rough[rough.len() - 1] + best_gap / 2.0);
    for w in rough.windows(2) {
        let gap = w[1] - w[0];
        if gap > best_gap {
            best_gap = gap;
            mid = w[0] + gap / 2.0;
        }
    }
    // Rotating by e^{iφ} maps phase θ to θ − φ; send the gap midpoint to π.
    let shift = mid - PI;
    let rotated = u * Complex64::from_polar(1.0, shift);
    let (thetas, vectors) =
        cayley_eigenphases(&rotated).ok_or(Error::BranchCut { phase: PI })?;
    let thetas = thetas.into_iter().map(|t| wrap_phase(t + shift)).collect();
    Ok((thetas, vectors))
}

/// Principal logarithm: the Hermitian `H` with `e^{−iH} = u` and spectrum in
/// `(−π, π)`. An eigenphase on the cut at ±π is reported as
/// [`Error::BranchCut`].
pub fn logm_unitary(u: &Matrix) -> Result<Matrix> {
    let (thetas, vectors) = unitary_eigenphases(u)?;
    if let Some(&bad) = thetas.iter().find(|t| t.abs() >= PI - BRANCH_TOLERANCE) {
        return Err(Error::BranchCut { phase: bad });
    }
    let values: Vec<Complex64> = thetas.iter().map(|&t| c(t)).collect();
    Ok(hermitian_part(&from_spectrum(&values, &vectors)))
}

/// Reduced matrix over the factors listed in `keep` (any order; output
/// factor order follows `keep` sorted ascending).
pub fn partial_trace_matrix(m: &Matrix, dims: &[usize], keep: &[usize]) -> Result<Matrix> {
    check_square(m)?;
    let total: usize = dims.iter().product();
    if total != m.nrows() {
        return Err(Error::DimensionMismatch {
            expected: total,
            got: m.nrows(),
        });
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::InvalidParameter(format!(
            "factor {bad} out of range for {} factors",
            dims.len()
        )));
    }
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut d = vec![0; dims.len()];
        for f in (0..dims.len()).rev() {
            d[f] = idx % dims[f];
            idx /= dims[f];
        }
        d
    };
    let split = |d: &[usize]| -> (usize, usize) {
        let (mut kept, mut traced) = (0, 0);
        for (f, &x) in d.iter().enumerate() {
            if keep.binary_search(&f).is_ok() {
                kept = kept * dims[f] + x;
            } else {
                traced = traced * dims[f] + x;
            }
        }
        (kept, traced)
    };
    let index: Vec<(usize, usize)> = (0..total).map(|i| split(&digits(i))).collect();
    let mut out = Matrix::zeros(kept_dim, kept_dim);
    for (r, &(kr, tr)) in index.iter().enumerate() {
        for (col, &(kc, tc)) in index.iter().enumerate() {
            if tr == tc {
                out[(kr, kc)] += m[(r, col)];
            }
        }
    }
    Ok(out)
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<Complex64>);

impl StateVector {
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > DEFAULT_TOLERANCE {
            return Err(Error::InvalidState {
                kind: "state vector",
                reason: format!("norm {norm}"),
            });
        }
        Ok(Self(amplitudes))
    }

    /// Normalizes the input.
    pub fn normalized(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState {
                kind: "state vector",
                reason: "zero or non-finite norm".into(),
            });
        }
        Ok(Self(amplitudes / c(norm)))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[index] = c(1.0);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.0.dotc(&other.0)
    }

    /// Multiplies by the phase that makes the largest-magnitude amplitude
    /// real and positive (first such index on ties).
    pub fn with_canonical_phase(self) -> Self {
        let mut best = 0;
        for (k, z) in self.0.iter().enumerate() {
            if z.norm() > self.0[best].norm() + 1e-12 {
                best = k;
            }
        }
        let a = self.0[best];
        if a.norm() == 0.0 {
            return self;
        }
        Self(self.0 * (a.conj() / c(a.norm())))
    }

    pub fn evolve(&self, u: &Matrix) -> StateVector {
        StateVector(u * &self.0)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix(&self.0 * self.0.adjoint())
    }
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Matrix);

impl DensityMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        check_square(&m)?;
        let invalid = |reason: String| Error::InvalidState {
            kind: "density matrix",
            reason,
        };
        let herm = hermiticity_deviation(&m);
        if herm > DEFAULT_TOLERANCE {
            return Err(invalid(format!("not Hermitian ({herm:.3e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > DEFAULT_TOLERANCE || tr.im.abs() > DEFAULT_TOLERANCE {
            return Err(invalid(format!("trace {tr}")));
        }
        let min = eigvalsh(&m).first().copied().unwrap_or(0.0);
        if min < -DEFAULT_TOLERANCE {
            return Err(invalid(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self(m))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(identity(dim) * c(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self(kron(&self.0, &other.0))
    }

    /// `U ρ U†`.
    pub fn evolve(&self, u: &Matrix) -> DensityMatrix {
        Self(u * &self.0 * u.adjoint())
    }

    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace_matrix(&self.0, dims, keep).map(Self)
    }
}

impl From<&StateVector> for DensityMatrix {
    fn from(psi: &StateVector) -> Self {
        psi.to_density()
    }
}
