//! Pauli strings in symplectic form and their products.
//!
//! Qubit `q` holds X when only bit `q` of `x` is set, Z when only `z` is set,
//! Y when both are set. As an operator the string is `i^{x·z} X^x Z^z`, so
//! each Y factor is exactly the Pauli Y matrix.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Widest string representable by the bitmasks.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("Pauli width mismatch: {0} vs {1} qubits")]
    WidthMismatch(usize, usize),
    #[error("invalid Pauli letter {0:?}")]
    InvalidLetter(char),
    #[error("Pauli strings are limited to {MAX_QUBITS} qubits, got {0}")]
    TooWide(usize),
}

/// A power of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
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
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Self, PauliError> {
        match c {
            'I' => Ok(Letter::I),
            'X' => Ok(Letter::X),
            'Y' => Ok(Letter::Y),
            'Z' => Ok(Letter::Z),
            other => Err(PauliError::InvalidLetter(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

fn width_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS);
        Self { n_qubits, x: 0, z: 0 }
    }

    /// Masks are truncated to the string width.
    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Result<Self, PauliError> {
        if n_qubits > MAX_QUBITS {
            return Err(PauliError::TooWide(n_qubits));
        }
        let m = width_mask(n_qubits);
        Ok(Self { n_qubits, x: x & m, z: z & m })
    }

    /// Single-qubit factor on `qubit`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, letter: Letter) -> Self {
        assert!(qubit < n_qubits);
        let mut p = Self::identity(n_qubits);
        p.set(qubit, letter);
        p
    }

    /// Parses a letter string whose leftmost character is the highest qubit.
    pub fn from_letters(s: &str) -> Result<Self, PauliError> {
        let chars: Vec<char> = s.chars().collect();
        let n = chars.len();
        if n > MAX_QUBITS {
            return Err(PauliError::TooWide(n));
        }
        let mut p = Self::identity(n);
        for (i, c) in chars.iter().enumerate() {
            p.set(n - 1 - i, Letter::from_char(*c)?);
        }
        Ok(p)
    }

    pub fn from_letter_slice(letters: &[Letter]) -> Self {
        let mut p = Self::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set(q, l);
        }
        p
    }

    fn set(&mut self, qubit: usize, letter: Letter) {
        let bit = 1u64 << qubit;
        self.x &= !bit;
        self.z &= !bit;
        match letter {
            Letter::I => {}
            Letter::X => self.x |= bit,
            Letter::Y => {
                self.x |= bit;
                self.z |= bit
            }
            Letter::Z => self.z |= bit,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    /// Qubits carrying a non-identity factor.
    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    pub fn letter(&self, qubit: usize) -> Letter {
        let xb = self.x >> qubit & 1 == 1;
        let zb = self.z >> qubit & 1 == 1;
        match (xb, zb) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    /// Letters indexed by qubit (qubit 0 first).
    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n_qubits).map(|q| self.letter(q)).collect()
    }

    /// Letter string with the highest qubit leftmost.
    pub fn to_letters(&self) -> String {
        (0..self.n_qubits).rev().map(|q| self.letter(q).as_char()).collect()
    }

    /// Number of Y factors; the `i^{x·z}` prefactor.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Same string padded with identities up to `n_qubits`.
    pub fn widened(&self, n_qubits: usize) -> Self {
        assert!(n_qubits >= self.n_qubits && n_qubits <= MAX_QUBITS);
        Self { n_qubits, ..*self }
    }

    /// Whether the two strings commute as operators.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n_qubits.cmp(&other.n_qubits).then_with(|| {
            for q in (0..self.n_qubits).rev() {
                match self.letter(q).cmp(&other.letter(q)) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_letters())
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_letters())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        PauliString::from_letters(&s).map_err(serde::de::Error::custom)
    }
}

/// Dense `2^n × 2^n` matrix, qubit 0 the least significant index bit.
pub fn to_dense(p: &PauliString) -> DMatrix<Complex64> {
    let dim = 1usize << p.n_qubits;
    let prefactor = Phase::from_exponent(p.y_count() as i64).to_complex();
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        let sign = if (b as u64 & p.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        m[(b ^ p.x as usize, b)] = prefactor * sign;
    }
    m
}

/// Product `P·Q = phase·R`.
pub fn pauli_mul(p: &PauliString, q: &PauliString) -> Result<(Phase, PauliString), PauliError> {
    if p.n_qubits != q.n_qubits {
        return Err(PauliError::WidthMismatch(p.n_qubits, q.n_qubits));
    }
    Ok(mul_unchecked(p, q))
}

pub(crate) fn mul_unchecked(p: &PauliString, q: &PauliString) -> (Phase, PauliString) {
    let x = p.x ^ q.x;
    let z = p.z ^ q.z;
    let r = PauliString { n_qubits: p.n_qubits, x, z };
    let k = p.y_count() as i64 + q.y_count() as i64 - r.y_count() as i64
        + 2 * (p.z & q.x).count_ones() as i64;
    (Phase::from_exponent(k), r)
}

/// True iff on every qubit the two letters agree or one is identity.
pub fn qubitwise_commute(p: &PauliString, q: &PauliString) -> Result<bool, PauliError> {
    if p.n_qubits != q.n_qubits {
        return Err(PauliError::WidthMismatch(p.n_qubits, q.n_qubits));
    }
    let both = p.support() & q.support();
    Ok((p.x ^ q.x) & both == 0 && (p.z ^ q.z) & both == 0)
}
