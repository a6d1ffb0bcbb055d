use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{dmatrix_serde, DataError, Document, Orbitals};

const SYMMETRY_TOL: f64 = 1e-10;

/// Active-space electronic Hamiltonian in chemists' notation.
///
/// `H = E_core + Σ h_pq E_pq + ½ Σ (pq|rs) (E_pq E_rs − δ_qr E_ps)` over
/// spatial orbitals, with `two_body` stored densely as `[p][q][r][s]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FermionHamiltonianRaw")]
pub struct FermionHamiltonian {
    orbitals: Option<Arc<Orbitals>>,
    n_orbitals: usize,
    core_energy: f64,
    #[serde(with = "dmatrix_serde")]
    one_body: DMatrix<f64>,
    two_body: Vec<f64>,
}

#[derive(Deserialize)]
struct FermionHamiltonianRaw {
    orbitals: Option<Arc<Orbitals>>,
    n_orbitals: usize,
    core_energy: f64,
    #[serde(with = "dmatrix_serde")]
    one_body: DMatrix<f64>,
    two_body: Vec<f64>,
}

impl TryFrom<FermionHamiltonianRaw> for FermionHamiltonian {
    type Error = DataError;

    fn try_from(r: FermionHamiltonianRaw) -> Result<Self, DataError> {
        if r.one_body.nrows() != r.n_orbitals {
            return Err(DataError::Invariant("n_orbitals does not match the one-body matrix".into()));
        }
        FermionHamiltonian::new(r.orbitals, r.core_energy, r.one_body, r.two_body)
    }
}

impl FermionHamiltonian {
    pub fn new(
        orbitals: Option<Arc<Orbitals>>,
        core_energy: f64,
        one_body: DMatrix<f64>,
        two_body: Vec<f64>,
    ) -> Result<Self, DataError> {
        let n = one_body.nrows();
        if one_body.ncols() != n {
            return Err(DataError::Invariant("one-body matrix must be square".into()));
        }
        if two_body.len() != n.pow(4) {
            return Err(DataError::Invariant(format!("two-body tensor must have {} entries", n.pow(4))));
        }
        if !core_energy.is_finite() || one_body.iter().chain(&two_body).any(|v| !v.is_finite()) {
            return Err(DataError::Invariant("non-finite integrals".into()));
        }
        for p in 0..n {
            for q in 0..p {
                if (one_body[(p, q)] - one_body[(q, p)]).abs() > SYMMETRY_TOL {
                    return Err(DataError::Invariant(format!("one-body matrix not symmetric at ({p},{q})")));
                }
            }
        }
        let at = |p: usize, q: usize, r: usize, s: usize| two_body[((p * n + q) * n + r) * n + s];
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = at(p, q, r, s);
                        for w in [at(q, p, r, s), at(p, q, s, r), at(r, s, p, q)] {
                            if (v - w).abs() > SYMMETRY_TOL {
                                return Err(DataError::Invariant(format!(
                                    "two-body tensor lacks permutational symmetry at ({p}{q}|{r}{s})"
                                )));
                            }
                        }
                    }
                }
            }
        }
        if let Some(orb) = &orbitals {
            let available = orb.active_space().map_or(orb.n_mo(), |s| s.active.len());
            if available != n {
                return Err(DataError::Invariant("orbital reference does not match n_orbitals".into()));
            }
        }
        Ok(Self { orbitals, n_orbitals: n, core_energy, one_body, two_body })
    }

    pub fn orbitals(&self) -> Option<&Arc<Orbitals>> {
        self.orbitals.as_ref()
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn core_energy(&self) -> f64 {
        self.core_energy
    }

    pub fn one_body(&self) -> &DMatrix<f64> {
        &self.one_body
    }

    /// Dense `[p][q][r][s]` tensor.
    pub fn two_body(&self) -> &[f64] {
        &self.two_body
    }

    #[inline]
    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.one_body[(p, q)]
    }

    /// `(pq|rs)`.
    #[inline]
    pub fn g(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_orbitals;
        self.two_body[((p * n + q) * n + r) * n + s]
    }
}

impl Document for FermionHamiltonian {
    const KIND: &'static str = "fermion_hamiltonian";
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{from_json, to_json};

    #[test]
    fn roundtrip_is_bit_exact() {
        let h = DMatrix::from_row_slice(2, 2, &[-1.1, 0.1 / 3.0, 0.1 / 3.0, -0.4]);
        let mut g = vec![0.0; 16];
        g[0] = 0.6;
        g[15] = 0.7 / 3.0;
        let ham = FermionHamiltonian::new(None, 0.7142857142857143, h, g).unwrap();
        let back: FermionHamiltonian = from_json(&to_json(&ham)).unwrap();
        assert_eq!(back, ham);
        assert_eq!(back.h(0, 1).to_bits(), ham.h(0, 1).to_bits());
    }

    #[test]
    fn rejects_asymmetry() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(FermionHamiltonian::new(None, 0.0, h, vec![0.0; 16]).is_err());
        let mut g = vec![0.0; 16];
        g[1] = 0.5; // (00|01) without its partners
        assert!(FermionHamiltonian::new(None, 0.0, DMatrix::zeros(2, 2), g).is_err());
    }
}
