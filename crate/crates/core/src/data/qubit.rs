use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DataError, Document};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::pauli::{to_dense, PauliString};

/// Coefficients below this magnitude are dropped after combining terms.
pub const TERM_THRESHOLD: f64 = 1e-12;

/// Real-weighted sum of Pauli strings, sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QubitHamiltonianRaw")]
pub struct QubitHamiltonian {
    n_qubits: usize,
    terms: Vec<(PauliString, f64)>,
}

#[derive(Deserialize)]
struct QubitHamiltonianRaw {
    n_qubits: usize,
    terms: Vec<(PauliString, f64)>,
}

impl TryFrom<QubitHamiltonianRaw> for QubitHamiltonian {
    type Error = DataError;

    /// Stored documents must already be in canonical form.
    fn try_from(r: QubitHamiltonianRaw) -> Result<Self, DataError> {
        let h = QubitHamiltonian::from_terms(r.n_qubits, r.terms.clone())?;
        if h.terms != r.terms {
            return Err(DataError::Invariant("terms must be sorted, unique and above threshold".into()));
        }
        Ok(h)
    }
}

impl QubitHamiltonian {
    /// Combines like strings, sorts them and drops negligible coefficients.
    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = (PauliString, f64)>) -> Result<Self, DataError> {
        let mut acc: BTreeMap<PauliString, f64> = BTreeMap::new();
        for (p, c) in terms {
            if p.n_qubits() != n_qubits {
                return Err(DataError::Invariant(format!(
                    "term {p} has {} qubits, expected {n_qubits}",
                    p.n_qubits()
                )));
            }
            if !c.is_finite() {
                return Err(DataError::Invariant(format!("term {p} has a non-finite coefficient")));
            }
            *acc.entry(p).or_insert(0.0) += c;
        }
        let terms = acc.into_iter().filter(|(_, c)| c.abs() >= TERM_THRESHOLD).collect();
        Ok(Self { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(PauliString, f64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the all-identity string.
    pub fn identity_coefficient(&self) -> f64 {
        self.terms.iter().find(|(p, _)| p.is_identity()).map_or(0.0, |(_, c)| *c)
    }

    /// Dense matrix of the operator; intended for small `n_qubits`.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (p, c) in &self.terms {
            m += to_dense(p) * Complex64::new(*c, 0.0);
        }
        m
    }

    pub fn coefficient(&self, p: &PauliString) -> f64 {
        self.terms
            .binary_search_by(|(q, _)| q.cmp(p))
            .map_or(0.0, |i| self.terms[i].1)
    }
}

impl Document for QubitHamiltonian {
    const KIND: &'static str = "qubit_hamiltonian";
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{from_json, to_json};

    fn ps(s: &str) -> PauliString {
        PauliString::from_letters(s).unwrap()
    }

    #[test]
    fn combines_and_drops() {
        let h = QubitHamiltonian::from_terms(
            2,
            [(ps("ZZ"), 0.5), (ps("IX"), 1e-13), (ps("ZZ"), 0.25), (ps("II"), -1.0)],
        )
        .unwrap();
        assert_eq!(h.terms(), &[(ps("II"), -1.0), (ps("ZZ"), 0.75)]);
        assert_eq!(h.identity_coefficient(), -1.0);
        assert_eq!(h.coefficient(&ps("ZZ")), 0.75);
    }

    #[test]
    fn json_form() {
        let h = QubitHamiltonian::from_terms(1, [(ps("Z"), -0.5)]).unwrap();
        let text = to_json(&h);
        assert_eq!(text, r#"{"kind":"qubit_hamiltonian","version":1,"n_qubits":1,"terms":[["Z",-0.5]]}"#);
        let back: QubitHamiltonian = from_json(&text).unwrap();
        assert_eq!(back.terms()[0].1.to_bits(), (-0.5f64).to_bits());
        let dup = r#"{"kind":"qubit_hamiltonian","version":1,"n_qubits":1,"terms":[["Z",1.0],["Z",1.0]]}"#;
        assert!(matches!(from_json::<QubitHamiltonian>(dup), Err(DataError::Invariant(_))));
    }
}
