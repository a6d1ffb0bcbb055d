//! Fermion-to-qubit encodings.
//!
//! Spin orbitals are interleaved: spatial orbital `p` with spin `σ` (0 = alpha,
//! 1 = beta) is mode `2p + σ`. Every encoding here is linear over GF(2): the
//! qubit basis state of an occupation vector `n` is `b = M n` for a unit
//! lower-triangular matrix `M` (identity for Jordan–Wigner, prefix sums for
//! parity, the Fenwick tree for Bravyi–Kitaev).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::data::{DataError, Determinant, FermionHamiltonian, QubitHamiltonian, Wavefunction};
use crate::pauli::{mul_unchecked, PauliString, MAX_QUBITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MappingError {
    #[error("unknown encoding {0:?} (available: bravyi_kitaev, jordan_wigner, parity)")]
    UnknownEncoding(String),
    #[error("{0} spin orbitals exceed the {MAX_QUBITS}-qubit limit")]
    TooManyModes(usize),
    #[error("term {term} has imaginary coefficient {imag:e}")]
    NonHermitian { term: String, imag: f64 },
    #[error("determinant over {found} orbitals does not fit {expected} qubits")]
    WidthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Imaginary parts above this after combining terms indicate a bug or bad input.
const IMAG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Encoding {
    JordanWigner,
    Parity,
    BravyiKitaev,
}

impl Encoding {
    pub const ALL: [Encoding; 3] = [Encoding::JordanWigner, Encoding::Parity, Encoding::BravyiKitaev];

    pub fn name(self) -> &'static str {
        match self {
            Encoding::JordanWigner => "jordan_wigner",
            Encoding::Parity => "parity",
            Encoding::BravyiKitaev => "bravyi_kitaev",
        }
    }

    /// Rows of `M` as bitmasks.
    pub fn matrix(self, n: usize) -> Vec<u64> {
        (0..n)
            .map(|i| match self {
                Encoding::JordanWigner => 1u64 << i,
                Encoding::Parity => low_mask(i + 1),
                Encoding::BravyiKitaev => {
                    let span = (i + 1) & (i + 1).wrapping_neg();
                    low_mask(i + 1) & !low_mask(i + 1 - span)
                }
            })
            .collect()
    }

    /// `b = M n` for an occupation bitmask over `n` modes.
    pub fn encode(self, n: usize, occupation: u64) -> u64 {
        self.matrix(n)
            .iter()
            .enumerate()
            .fold(0, |b, (i, row)| b | (((row & occupation).count_ones() as u64 & 1) << i))
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Encoding {
    type Err = MappingError;

    fn from_str(s: &str) -> Result<Self, MappingError> {
        Encoding::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| MappingError::UnknownEncoding(s.to_string()))
    }
}

fn low_mask(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// Inverse of a unit lower-triangular GF(2) matrix given by rows.
fn inverse_unit_lower(rows: &[u64]) -> Vec<u64> {
    let n = rows.len();
    let mut inv: Vec<u64> = Vec::with_capacity(n);
    for i in 0..n {
        // Row i of M⁻¹: e_i minus the combination of earlier inverse rows selected by M's off-diagonal entries.
        let mut r = 1u64 << i;
        for (k, row) in inv.iter().enumerate() {
            if rows[i] >> k & 1 == 1 {
                r ^= row;
            }
        }
        inv.push(r);
    }
    inv
}

/// A linear combination of Pauli strings with complex weights.
pub type PauliSum = Vec<(Complex64, PauliString)>;

/// Encoded ladder operators for one mode count.
#[derive(Debug, Clone)]
pub struct LadderOperators {
    n_modes: usize,
    annihilators: Vec<PauliSum>,
}

impl LadderOperators {
    pub fn new(encoding: Encoding, n_modes: usize) -> Result<Self, MappingError> {
        if n_modes > MAX_QUBITS {
            return Err(MappingError::TooManyModes(n_modes));
        }
        let m = encoding.matrix(n_modes);
        let inv = inverse_unit_lower(&m);
        let annihilators = (0..n_modes)
            .map(|j| {
                // Flipping n_j flips every b_i with M_ij = 1.
                let flip: u64 = (0..n_modes).filter(|&i| m[i] >> j & 1 == 1).fold(0, |acc, i| acc | 1 << i);
                let parity: u64 = inv[..j].iter().fold(0, |acc, r| acc ^ r);
                let occupied = inv[j];
                let x = PauliString::from_masks(n_modes, flip, 0).unwrap();
                let zp = PauliString::from_masks(n_modes, 0, parity).unwrap();
                let zr = PauliString::from_masks(n_modes, 0, occupied).unwrap();
                // a_j = X_flip Z_parity (I − Z_occupied) / 2
                let (ph1, t1) = mul_unchecked(&x, &zp);
                let (ph2, t2) = mul_unchecked(&t1, &zr);
                vec![(ph1.to_complex() * 0.5, t1), ((ph1 * ph2).to_complex() * -0.5, t2)]
            })
            .collect();
        Ok(Self { n_modes, annihilators })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn annihilator(&self, j: usize) -> &PauliSum {
        &self.annihilators[j]
    }

    pub fn creator(&self, j: usize) -> PauliSum {
        self.annihilators[j].iter().map(|(c, p)| (c.conj(), *p)).collect()
    }
}

/// Product of Pauli sums, left factor first.
pub fn multiply(a: &PauliSum, b: &PauliSum) -> PauliSum {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (ca, pa) in a {
        for (cb, pb) in b {
            let (ph, r) = mul_unchecked(pa, pb);
            out.push((ca * cb * ph.to_complex(), r));
        }
    }
    out
}

/// Encodes `h` on `2 · n_orbitals` qubits; the identity term carries `E_core`.
pub fn map_fermion_to_qubit(h: &FermionHamiltonian, encoding: Encoding) -> Result<QubitHamiltonian, MappingError> {
    let n = h.n_orbitals();
    let modes = 2 * n;
    let ops = LadderOperators::new(encoding, modes)?;
    let creators: Vec<PauliSum> = (0..modes).map(|j| ops.creator(j)).collect();
    let mut acc: BTreeMap<PauliString, Complex64> = BTreeMap::new();
    let mut add = |sum: PauliSum, w: f64| {
        for (c, p) in sum {
            *acc.entry(p).or_insert(Complex64::new(0.0, 0.0)) += c * w;
        }
    };
    add(vec![(Complex64::new(1.0, 0.0), PauliString::identity(modes))], h.core_energy());
    let mode = |p: usize, spin: usize| 2 * p + spin;
    // One-body
    let mut pairs: Vec<Vec<PauliSum>> = vec![Vec::with_capacity(modes); modes];
    for (a, row) in pairs.iter_mut().enumerate() {
        for b in 0..modes {
            row.push(multiply(&creators[a], ops.annihilator(b)));
        }
    }
    for spin in 0..2 {
        for p in 0..n {
            for q in 0..n {
                let v = h.h(p, q);
                if v != 0.0 {
                    add(pairs[mode(p, spin)][mode(q, spin)].clone(), v);
                }
            }
        }
    }
    // Two-body: ½ (pq|rs) a†_pσ a†_rτ a_sτ a_qσ
    for s1 in 0..2 {
        for s2 in 0..2 {
            for p in 0..n {
                for r in 0..n {
                    let (mp, mr) = (mode(p, s1), mode(r, s2));
                    if mp == mr {
                        continue;
                    }
                    for q in 0..n {
                        for s in 0..n {
                            let (mq, ms) = (mode(q, s1), mode(s, s2));
                            if mq == ms {
                                continue;
                            }
                            let v = h.g(p, q, r, s);
                            if v == 0.0 {
                                continue;
                            }
                            // a†_p a†_r a_s a_q = a†_p (a†_r a_s) a_q
                            let left = multiply(&creators[mp], &pairs[mr][ms]);
                            add(multiply(&left, ops.annihilator(mq)), 0.5 * v);
                        }
                    }
                }
            }
        }
    }
    let mut terms = Vec::with_capacity(acc.len());
    for (p, c) in acc {
        if c.im.abs() > IMAG_TOL {
            return Err(MappingError::NonHermitian { term: p.to_letters(), imag: c.im });
        }
        terms.push((p, c.re));
    }
    Ok(QubitHamiltonian::from_terms(modes, terms)?)
}

/// Interleaved occupation bitmask of a determinant and the sign relating the
/// alpha-then-beta determinant ordering to the interleaved mode ordering.
pub fn interleave(det: Determinant, n_orbitals: usize) -> (f64, u64) {
    let mut occ = 0u64;
    let mut inversions = 0u32;
    for i in 0..n_orbitals {
        if det.alpha >> i & 1 == 1 {
            occ |= 1 << (2 * i);
            inversions += (det.beta & low_mask(i)).count_ones();
        }
        if det.beta >> i & 1 == 1 {
            occ |= 1 << (2 * i + 1);
        }
    }
    (if inversions % 2 == 1 { -1.0 } else { 1.0 }, occ)
}

/// Qubit basis state of `det` under `encoding`, with its sign.
pub fn determinant_to_basis_state(det: Determinant, n_orbitals: usize, encoding: Encoding) -> (f64, u64) {
    let (sign, occ) = interleave(det, n_orbitals);
    (sign, encoding.encode(2 * n_orbitals, occ))
}

/// Signed amplitudes of `wf` on the `2 · n_orbitals`-qubit computational basis.
pub fn wavefunction_to_basis_amplitudes(wf: &Wavefunction, encoding: Encoding) -> Vec<(u64, f64)> {
    let n = wf.n_orbitals();
    wf.iter()
        .map(|(d, c)| {
            let (sign, b) = determinant_to_basis_state(d, n, encoding);
            (b, sign * c)
        })
        .collect()
}

#[cfg(test)]
mod tests;
