//! Phased Pauli strings.
//!
//! A [`PauliString`] is `i^k · σ_1 ⊗ σ_2 ⊗ … ⊗ σ_n` with `k ∈ {0,1,2,3}`.
//! Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of
//! a computational basis index.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Largest qubit count for which dense forms are built unless the caller
/// raises the limit explicitly.
pub const DEFAULT_MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Product `self · other` as (power of i, letter).
    pub fn product(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn matrix(self) -> Matrix {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => Matrix::from_row_slice(2, 2, &[l, o, o, l]),
            Pauli::X => Matrix::from_row_slice(2, 2, &[o, l, l, o]),
            Pauli::Y => Matrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Pauli::Z => Matrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }
}

/// Global phase `i^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u8) -> Self {
        Phase(k % 4)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn value(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    phase: Phase,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(phase: Phase, letters: Vec<Pauli>) -> Self {
        Self { phase, letters }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Phase::ONE, vec![Pauli::I; n])
    }

    /// `letter` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.letters[qubit] = letter;
        s
    }

    /// `letter` on every listed qubit.
    pub fn on(n: usize, qubits: &[usize], letter: Pauli) -> Self {
        let mut s = Self::identity(n);
        for &q in qubits {
            s.letters[q] = letter;
        }
        s
    }

    /// `letter^{⊗n}`.
    pub fn global(n: usize, letter: Pauli) -> Self {
        Self::new(Phase::ONE, vec![letter; n])
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        self.letters[qubit]
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Non-identity sites.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.weight() == 0
    }

    /// Same letters with phase `+1`.
    pub fn canonical(&self) -> Self {
        Self::new(Phase::ONE, self.letters.clone())
    }

    pub fn with_phase(&self, phase: Phase) -> Self {
        Self::new(phase, self.letters.clone())
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.phase.conj(), self.letters.clone())
    }

    pub fn same_letters(&self, other: &PauliString) -> bool {
        self.letters == other.letters
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PauliString) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Self::new(self.phase * other.phase, letters)
    }

    fn check_len(&self, other: &PauliString) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(())
    }

    /// Phased product `self · other`.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        self.check_len(other)?;
        let mut phase = self.phase * other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (k, p) = a.product(b);
                phase = phase * Phase::from_power(k);
                p
            })
            .collect();
        Ok(PauliString::new(phase, letters))
    }

    /// Number of sites where both letters are non-identity and differ.
    fn clash_count(&self, other: &PauliString) -> usize {
        self.letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count()
    }

    /// `true` iff `self · other = other · self`.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.clash_count(other).is_multiple_of(2))
    }

    pub fn to_dense(&self) -> Result<Matrix> {
        self.to_dense_with_limit(DEFAULT_MAX_QUBITS)
    }

    /// Dense `2^n × 2^n` matrix. Built column by column: a Pauli string
    /// maps each basis state to a single phased basis state.
    pub fn to_dense_with_limit(&self, max_qubits: usize) -> Result<Matrix> {
        let n = self.len();
        if n > max_qubits {
            return Err(Error::DimensionOverflow {
                qubits: n,
                max: max_qubits,
            });
        }
        let dim = 1usize << n;
        let mut m = Matrix::zeros(dim, dim);
        for col in 0..dim {
            let (row, amp) = self.image_of_basis(col);
            m[(row, col)] = amp;
        }
        Ok(m)
    }

    /// `P|b⟩ = amp · |row⟩`.
    pub fn image_of_basis(&self, b: usize) -> (usize, Complex64) {
        let n = self.len();
        let mut row = b;
        let mut k = self.phase.power();
        for (q, &p) in self.letters.iter().enumerate() {
            let bit = (b >> (n - 1 - q)) & 1;
            match p {
                Pauli::I => {}
                Pauli::X => row ^= 1 << (n - 1 - q),
                Pauli::Y => {
                    row ^= 1 << (n - 1 - q);
                    // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
                    k += if bit == 0 { 1 } else { 3 };
                }
                Pauli::Z => {
                    if bit == 1 {
                        k += 2;
                    }
                }
            }
        }
        (row, Phase::from_power(k % 4).value())
    }

    /// Applies the string to a state vector of length `2^n`.
    pub fn apply(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        let dim = 1usize << self.len();
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: amplitudes.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (b, &a) in amplitudes.iter().enumerate() {
            let (row, amp) = self.image_of_basis(b);
            out[row] += amp * a;
        }
        Ok(out)
    }

    /// Compact label such as `X1X2` (1-based sites), or `I` for identity.
    pub fn sites_label(&self) -> String {
        let s: String = self
            .letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, p)| format!("{}{}", p.as_char(), q + 1))
            .collect();
        if s.is_empty() {
            "I".to_string()
        } else {
            s
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phase)?;
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `XIZ`, `+XIZ`, `-iYY`, `iZ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("+i") {
            (Phase::I, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (Phase::MINUS_I, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (Phase::I, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (Phase::ONE, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, r)
        } else {
            (Phase::ONE, s)
        };
        let letters = rest
            .chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| Error::InvalidParameter(format!("bad Pauli letter {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::InvalidParameter(format!("empty Pauli string {s:?}")));
        }
        Ok(PauliString::new(phase, letters))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs};
    use proptest::prelude::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_table() {
        assert_eq!(ps("X").mul(&ps("Y")).unwrap(), ps("+iZ"));
        assert_eq!(ps("Y").mul(&ps("X")).unwrap(), ps("-iZ"));
        assert_eq!(ps("II").mul(&ps("-iXZ")).unwrap(), ps("-iXZ"));
    }

    #[test]
    fn two_site_product_phases_cancel() {
        // X·Z = −iY, Z·X = +iY
        assert_eq!(ps("XZ").mul(&ps("ZX")).unwrap(), ps("+YY"));
    }

    #[test]
    fn length_mismatch_is_error() {
        assert!(matches!(
            ps("XX").mul(&ps("X")),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(ps("XX").commutes(&ps("X")).is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(!ps("X").commutes(&ps("Y")).unwrap());
        assert!(ps("XX").commutes(&ps("ZZ")).unwrap());
        assert!(!ps("XI").commutes(&ps("YY")).unwrap());
    }

    #[test]
    fn dense_forms() {
        let x = ps("X").to_dense().unwrap();
        assert_eq!(x, Pauli::X.matrix());
        let iz = ps("+iZ").to_dense().unwrap();
        assert_eq!(iz[(0, 0)], Complex64::new(0.0, 1.0));
        assert_eq!(iz[(1, 1)], Complex64::new(0.0, -1.0));
        let xi = ps("XI").to_dense().unwrap();
        let expected = Pauli::X.matrix().kronecker(&Pauli::I.matrix());
        assert_eq!(xi, expected);
        let y = ps("Y").to_dense().unwrap();
        assert_eq!(y, Pauli::Y.matrix());
    }

    #[test]
    fn dense_limit_enforced() {
        let big = PauliString::identity(13);
        assert!(matches!(
            big.to_dense(),
            Err(Error::DimensionOverflow { qubits: 13, max: 12 })
        ));
        assert!(ps("XYZ").to_dense_with_limit(2).is_err());
    }

    #[test]
    fn global_y_relates_to_xz_with_n_dependent_sign() {
        for n in 1..6 {
            let xz = PauliString::global(n, Pauli::X)
                .mul(&PauliString::global(n, Pauli::Z))
                .unwrap();
            assert!(xz.same_letters(&PauliString::global(n, Pauli::Y)));
            assert_eq!(xz.phase(), Phase::from_power((3 * n % 4) as u8));
        }
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(ps("-iXYZ").to_string(), "-iXYZ");
        assert_eq!(ps("zx").to_string(), "+ZX");
        assert!("XQ".parse::<PauliString>().is_err());
        assert_eq!(ps("IXIX").sites_label(), "X2X4");
    }

    fn letter() -> impl Strategy<Value = Pauli> {
        prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
    }

    fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
        (0u8..4, prop::collection::vec(letter(), n))
            .prop_map(|(k, l)| PauliString::new(Phase::from_power(k), l))
    }

    fn pair() -> impl Strategy<Value = (PauliString, PauliString)> {
        (1usize..=4).prop_flat_map(|n| (pauli_string(n), pauli_string(n)))
    }

    proptest! {
        #[test]
        fn product_matches_dense((a, b) in pair()) {
            let prod = a.mul(&b).unwrap().to_dense().unwrap();
            let dense = a.to_dense().unwrap() * b.to_dense().unwrap();
            prop_assert!(max_abs(&(prod - dense)) <= 1e-12);
        }

        #[test]
        fn commutes_matches_dense((a, b) in pair()) {
            let c = commutator(&a.to_dense().unwrap(), &b.to_dense().unwrap());
            prop_assert_eq!(a.commutes(&b).unwrap(), max_abs(&c) < 1e-12);
        }

        #[test]
        fn square_is_real_identity(a in (1usize..=5).prop_flat_map(pauli_string)) {
            let sq = a.mul(&a).unwrap();
            prop_assert!(sq.is_identity_up_to_phase());
            prop_assert!(sq.phase().is_real());
        }

        #[test]
        fn multiplication_is_associative(
            (a, b, c) in (1usize..=4).prop_flat_map(|n| (pauli_string(n), pauli_string(n), pauli_string(n)))
        ) {
            let left = a.mul(&b).unwrap().mul(&c).unwrap();
            let right = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }
}
