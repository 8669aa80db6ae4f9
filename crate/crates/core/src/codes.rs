//! Decoupling groups, stabilizer codes, and the group-algebra machinery that
//! ties them together.
//!
//! A decoupling group `G = {G_k}` acts on operators through the group
//! average `Π_G(A) = (1/K) Σ_k G_k† A G_k`, the projector onto the commutant
//! of `G`. When `G` is the stabilizer group of a code, the commutant holds
//! the logical operators and the Hilbert space splits into syndrome sectors,
//! each of which is a copy of the code.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, identity, Matrix, StateVector};
use crate::pauli::{Pauli, PauliString, Phase};

/// Ordered decoupling group with `G_0 = I`. Elements are stored with phase
/// `+1`; closure is checked up to global phase since conjugation ignores it.
#[derive(Debug, Clone, PartialEq)]
pub struct DecouplingGroup {
    elements: Vec<PauliString>,
}

impl DecouplingGroup {
    pub fn new(elements: Vec<PauliString>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty decoupling group".into()))?;
        if !first.is_identity_up_to_phase() {
            return Err(Error::InvalidParameter(format!(
                "first group element must be the identity, got {first}"
            )));
        }
        let n = first.len();
        let elements: Vec<PauliString> = elements.iter().map(PauliString::canonical).collect();
        for (i, a) in elements.iter().enumerate() {
            if a.len() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: a.len(),
                });
            }
            if elements[..i].contains(a) {
                return Err(Error::InvalidParameter(format!("repeated group element {a}")));
            }
        }
        for a in &elements {
            for b in &elements {
                let prod = a.mul(b)?.canonical();
                if !elements.contains(&prod) {
                    return Err(Error::InvalidParameter(format!(
                        "group not closed: {a}·{b} = {prod} missing"
                    )));
                }
            }
        }
        Ok(Self { elements })
    }

    /// `{I}` on `n` qubits: no decoupling.
    pub fn trivial(n: usize) -> Self {
        Self {
            elements: vec![PauliString::identity(n)],
        }
    }

    /// Closure of the generators under multiplication, up to phase, in
    /// breadth-first order starting from the identity.
    pub fn generated_by(n: usize, generators: &[PauliString]) -> Result<Self> {
        let mut elements = vec![PauliString::identity(n)];
        let mut frontier = 0;
        while frontier < elements.len() {
            let current = elements[frontier].clone();
            for g in generators {
                let next = current.mul(g)?.canonical();
                if !elements.contains(&next) {
                    elements.push(next);
                }
            }
            frontier += 1;
        }
        Self::new(elements)
    }

    pub fn elements(&self) -> &[PauliString] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.elements[0].len()
    }

    pub fn is_abelian(&self) -> bool {
        self.elements
            .iter()
            .all(|a| self.elements.iter().all(|b| a.commutes(b).unwrap_or(false)))
    }

    /// `true` when the phase-`+1` elements multiply among themselves with no
    /// leftover sign, i.e. the group is a linear rather than a projective
    /// representation.
    pub fn is_linear(&self) -> bool {
        self.elements.iter().all(|a| {
            self.elements.iter().all(|b| {
                a.mul(b)
                    .map(|p| p.phase() == Phase::ONE && self.elements.contains(&p))
                    .unwrap_or(false)
            })
        })
    }

    /// Dense forms of all elements.
    pub fn dense_elements(&self) -> Result<Vec<Matrix>> {
        self.elements.iter().map(PauliString::to_dense).collect()
    }
}

/// `G_uni = {I, X, Y, Z}` with `X = σ^x ⊗ … ⊗ σ^x` etc.
pub fn universal_group(n: usize) -> Result<DecouplingGroup> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("universal group needs n ≥ 2, got {n}")));
    }
    if !n.is_multiple_of(2) {
        return Err(Error::OddQubitCount(n));
    }
    Ok(DecouplingGroup {
        elements: vec![
            PauliString::identity(n),
            PauliString::global(n, Pauli::X),
            PauliString::global(n, Pauli::Y),
            PauliString::global(n, Pauli::Z),
        ],
    })
}

/// `G† A (G ⊗ I_bath)` for a Pauli string `G` acting on the leading factor
/// of a system ⊗ bath operator with bath dimension `bath_dim`.
pub fn conjugate_by_pauli(a: &Matrix, p: &PauliString, bath_dim: usize) -> Result<Matrix> {
    let sys_dim = 1usize << p.len();
    let dim = sys_dim * bath_dim;
    if a.nrows() != dim || a.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: a.nrows(),
        });
    }
    // P|b⟩ = g_b|π(b)⟩, so (P† A P)[b, b'] = conj(g_b) g_b' A[π(b), π(b')].
    let image: Vec<(usize, Complex64)> = (0..sys_dim).map(|b| p.image_of_basis(b)).collect();
    let mut out = Matrix::zeros(dim, dim);
    for r in 0..dim {
        let (rs, re) = (r / bath_dim, r % bath_dim);
        let (pr, gr) = image[rs];
        let gr = gr.conj();
        for col in 0..dim {
            let (cs, ce) = (col / bath_dim, col % bath_dim);
            let (pc, gc) = image[cs];
            out[(r, col)] = gr * gc * a[(pr * bath_dim + re, pc * bath_dim + ce)];
        }
    }
    Ok(out)
}

/// `Π_G(A) = (1/K) Σ_k G_k† A G_k`.
pub fn group_average(g: &DecouplingGroup, a: &Matrix) -> Result<Matrix> {
    lifted_group_average(g, a, 1)
}

/// Group average with each `G_k` lifted to `G_k ⊗ I_bath`.
pub fn lifted_group_average(g: &DecouplingGroup, a: &Matrix, bath_dim: usize) -> Result<Matrix> {
    let mut acc = Matrix::zeros(a.nrows(), a.ncols());
    for el in g.elements() {
        acc += conjugate_by_pauli(a, el, bath_dim)?;
    }
    Ok(acc / c(g.order() as f64))
}

/// Logical basis label: bit `j` is the state of logical qubit `j`.
pub type LogicalLabel = Vec<u8>;

#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    pub label: LogicalLabel,
    /// The two computational basis strings `x` and `not x`, smaller first.
    pub kets: [Vec<u8>; 2],
    pub state: StateVector,
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits = |v: &[u8]| v.iter().map(|b| char::from(b'0' + b)).collect::<String>();
        let label = if self.label.is_empty() {
            "_".to_string()
        } else {
            bits(&self.label)
        };
        write!(
            f,
            "{label}: (|{}⟩+|{}⟩)/√2",
            bits(&self.kets[0]),
            bits(&self.kets[1])
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerCode {
    n: usize,
    generators: Vec<PauliString>,
    codewords: Vec<Codeword>,
}

impl StabilizerCode {
    pub fn num_physical(&self) -> usize {
        self.n
    }

    pub fn num_logical(&self) -> usize {
        self.n - self.generators.len()
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// Codewords ordered by logical basis index (logical qubit 0 most
    /// significant).
    pub fn codewords(&self) -> &[Codeword] {
        &self.codewords
    }

    /// `2^n × 2^k` isometry whose columns are the codewords.
    pub fn isometry(&self) -> Matrix {
        let dim = 1usize << self.n;
        Matrix::from_fn(dim, self.codewords.len(), |r, k| {
            self.codewords[k].state.amplitudes()[r]
        })
    }

    /// Projector onto the code space.
    pub fn projector(&self) -> Matrix {
        let v = self.isometry();
        &v * v.adjoint()
    }
}

/// Encoded single-qubit operators `X̄_j`, `Z̄_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalOperatorSet {
    pub xbars: Vec<PauliString>,
    pub zbars: Vec<PauliString>,
}

/// The `[[n, n−2, 2]]` code stabilized by `G_uni`, with codewords
/// `(|x⟩ + |not x⟩)/√2` over even-weight `x`, and the 2-local logical
/// operators `X̄_j = σ_1^x σ_{j+1}^x`, `Z̄_j = σ_{j+1}^z σ_n^z` (1-based).
///
/// The label of `|x⟩` is fixed by `X̄` action on `|0…0⟩_L`: logical bits
/// `b` give `x = (parity(b), b_1, …, b_{n−2}, 0)`.
pub fn code_from_universal_group(n: usize) -> Result<(StabilizerCode, LogicalOperatorSet)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("code needs n ≥ 2, got {n}")));
    }
    if !n.is_multiple_of(2) {
        return Err(Error::OddQubitCount(n));
    }
    let k = n - 2;
    let dim = 1usize << n;
    let amp = c(1.0 / 2f64.sqrt());
    let to_index = |bits: &[u8]| bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    let codewords = (0..1usize << k)
        .map(|idx| {
            let label: Vec<u8> = (0..k).map(|j| ((idx >> (k - 1 - j)) & 1) as u8).collect();
            let parity = label.iter().sum::<u8>() % 2;
            let mut x = Vec::with_capacity(n);
            x.push(parity);
            x.extend_from_slice(&label);
            x.push(0);
            let not_x: Vec<u8> = x.iter().map(|b| 1 - b).collect();
            let mut v = DVector::zeros(dim);
            v[to_index(&x)] += amp;
            v[to_index(&not_x)] += amp;
            let kets = if x < not_x { [x, not_x] } else { [not_x, x] };
            Ok(Codeword {
                label,
                kets,
                state: StateVector::new(v)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let code = StabilizerCode {
        n,
        generators: vec![PauliString::global(n, Pauli::X), PauliString::global(n, Pauli::Z)],
        codewords,
    };
    let logicals = LogicalOperatorSet {
        xbars: (0..k).map(|j| PauliString::on(n, &[0, j + 1], Pauli::X)).collect(),
        zbars: (0..k).map(|j| PauliString::on(n, &[j + 1, n - 1], Pauli::Z)).collect(),
    };
    Ok((code, logicals))
}

/// Maps logical terms on `n − 2` qubits to physical 2-local terms on `n`
/// qubits. Allowed logical terms are single `X`/`Z` and two-body `XX`/`ZZ`;
/// two-body products collapse to `σ_{i+1}σ_{j+1}` because the shared
/// `σ_1^x` (or `σ_n^z`) squares to the identity.
pub fn encode_hamiltonian(n: usize, terms: &[(f64, PauliString)]) -> Result<Vec<(f64, PauliString)>> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "encoding needs n ≥ 4 for a nonempty logical register, got {n}"
        )));
    }
    let k = n - 2;
    terms
        .iter()
        .map(|(coef, term)| {
            if term.len() != k {
                return Err(Error::LengthMismatch {
                    left: k,
                    right: term.len(),
                });
            }
            if !term.phase().is_real() {
                return Err(Error::Unsupported(format!("non-Hermitian logical term {term}")));
            }
            let sign = if term.phase() == Phase::ONE { 1.0 } else { -1.0 };
            let support = term.support();
            let letters: Vec<Pauli> = support.iter().map(|&q| term.letter(q)).collect();
            let physical = match (support.as_slice(), letters.as_slice()) {
                ([j], [Pauli::X]) => PauliString::on(n, &[0, j + 1], Pauli::X),
                ([j], [Pauli::Z]) => PauliString::on(n, &[j + 1, n - 1], Pauli::Z),
                ([i, j], [Pauli::X, Pauli::X]) => PauliString::on(n, &[i + 1, j + 1], Pauli::X),
                ([i, j], [Pauli::Z, Pauli::Z]) => PauliString::on(n, &[i + 1, j + 1], Pauli::Z),
                _ => {
                    return Err(Error::Unsupported(format!(
                        "logical term {term}: only X, Z, XX, ZZ terms have 2-local encodings"
                    )))
                }
            };
            Ok((sign * coef, physical))
        })
        .collect()
}

/// `H_P = −E_P Σ_{j≥1} G_j` with every element at phase `+1`.
///
/// Eigenvalue statements about `H_P` need a linear (not projective)
/// Abelian group; for `G_uni` this means `n ≡ 0 (mod 4)`.
pub fn penalty_hamiltonian(g: &DecouplingGroup, ep: f64) -> Result<Matrix> {
    if !(ep >= 0.0) || !ep.is_finite() {
        return Err(Error::OutOfRange {
            name: "penalty",
            value: ep,
            range: "[0, ∞)",
        });
    }
    if !g.is_abelian() || !g.is_linear() {
        return Err(Error::Unsupported(format!(
            "penalty needs an Abelian group closed with +1 phases on {} qubits (n ≡ 0 mod 4 for the universal group)",
            g.num_qubits()
        )));
    }
    let dim = 1usize << g.num_qubits();
    let mut h = Matrix::zeros(dim, dim);
    for el in &g.elements()[1..] {
        h += el.to_dense()?;
    }
    Ok(h * c(-ep))
}

/// Number of group elements anticommuting with `error`.
pub fn anticommuting_count(g: &DecouplingGroup, error: &PauliString) -> Result<usize> {
    let mut a = 0;
    for el in g.elements() {
        if !el.commutes(error)? {
            a += 1;
        }
    }
    Ok(a)
}

/// Simultaneous eigenspace of the generators with eigenvalues `label`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyndromeSector {
    pub label: Vec<i8>,
    pub projector: Matrix,
}

impl SyndromeSector {
    pub fn rank(&self) -> usize {
        self.projector.trace().re.round() as usize
    }
}

/// The `2^{n−k}` syndrome projectors `Π_i (I + J_i g_i)/2`, labels in
/// lexicographic order with `+1` before `−1`.
pub fn syndrome_sectors(code: &StabilizerCode) -> Result<Vec<SyndromeSector>> {
    let gens = code.generators();
    for (i, a) in gens.iter().enumerate() {
        for b in &gens[i + 1..] {
            if !a.commutes(b)? {
                return Err(Error::Unsupported(format!(
                    "generators {a} and {b} anticommute; syndrome sectors need an Abelian set"
                )));
            }
        }
    }
    let dense: Vec<Matrix> = gens.iter().map(PauliString::to_dense).collect::<Result<_>>()?;
    let dim = 1usize << code.num_physical();
    let id = identity(dim);
    Ok((0..1usize << gens.len())
        .map(|idx| {
            let label: Vec<i8> = (0..gens.len())
                .map(|i| if (idx >> (gens.len() - 1 - i)) & 1 == 0 { 1 } else { -1 })
                .collect();
            let projector = dense.iter().zip(&label).fold(id.clone(), |acc, (g, &s)| {
                acc * ((&id + g * c(s as f64)) * c(0.5))
            });
            SyndromeSector { label, projector }
        })
        .collect())
}
