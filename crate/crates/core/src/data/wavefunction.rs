use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{DataError, Document, Orbitals};

const NORM_TOL: f64 = 1e-10;

/// Alpha and beta occupation bitmasks; bit `i` set means active orbital `i` is occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Determinant {
    pub alpha: u64,
    pub beta: u64,
}

impl Determinant {
    pub fn new(alpha: u64, beta: u64) -> Self {
        Self { alpha, beta }
    }

    /// Lowest `n_alpha` and `n_beta` orbitals filled.
    pub fn aufbau(n_alpha: usize, n_beta: usize) -> Self {
        Self { alpha: low_bits(n_alpha), beta: low_bits(n_beta) }
    }

    pub fn n_alpha(&self) -> usize {
        self.alpha.count_ones() as usize
    }

    pub fn n_beta(&self) -> usize {
        self.beta.count_ones() as usize
    }
}

pub(crate) fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Linear combination of determinants over `n_orbitals` active orbitals.
///
/// The optional orbital reference records which orbitals the determinants
/// are built from; model Hamiltonians without a molecular origin have none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WavefunctionRaw")]
pub struct Wavefunction {
    orbitals: Option<Arc<Orbitals>>,
    n_orbitals: usize,
    determinants: Vec<Determinant>,
    coefficients: Vec<f64>,
}

#[derive(Deserialize)]
struct WavefunctionRaw {
    orbitals: Option<Arc<Orbitals>>,
    n_orbitals: usize,
    determinants: Vec<Determinant>,
    coefficients: Vec<f64>,
}

impl TryFrom<WavefunctionRaw> for Wavefunction {
    type Error = DataError;

    fn try_from(r: WavefunctionRaw) -> Result<Self, DataError> {
        Wavefunction::new(r.orbitals, r.n_orbitals, r.determinants, r.coefficients)
    }
}

impl Wavefunction {
    pub fn new(
        orbitals: Option<Arc<Orbitals>>,
        n_orbitals: usize,
        determinants: Vec<Determinant>,
        coefficients: Vec<f64>,
    ) -> Result<Self, DataError> {
        if n_orbitals > 64 {
            return Err(DataError::Invariant(format!("{n_orbitals} orbitals exceed the 64-bit determinant limit")));
        }
        if determinants.is_empty() || determinants.len() != coefficients.len() {
            return Err(DataError::Invariant("need one coefficient per determinant and at least one determinant".into()));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(DataError::Invariant("non-finite coefficient".into()));
        }
        let norm: f64 = coefficients.iter().map(|c| c * c).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(DataError::Invariant(format!("coefficients are not normalized (sum of squares {norm})")));
        }
        let mask = low_bits(n_orbitals);
        let (na, nb) = (determinants[0].n_alpha(), determinants[0].n_beta());
        let mut seen = HashSet::with_capacity(determinants.len());
        for d in &determinants {
            if d.alpha & !mask != 0 || d.beta & !mask != 0 {
                return Err(DataError::Invariant(format!("determinant {d:?} uses orbitals beyond {n_orbitals}")));
            }
            if d.n_alpha() != na || d.n_beta() != nb {
                return Err(DataError::Invariant("determinants differ in electron counts".into()));
            }
            if !seen.insert(*d) {
                return Err(DataError::Invariant(format!("duplicate determinant {d:?}")));
            }
        }
        if let Some(orb) = &orbitals {
            let available = orb.active_space().map_or(orb.n_mo(), |s| s.active.len());
            if available != n_orbitals {
                return Err(DataError::Invariant(format!(
                    "wavefunction spans {n_orbitals} orbitals but its orbitals provide {available}"
                )));
            }
        }
        Ok(Self { orbitals, n_orbitals, determinants, coefficients })
    }

    pub fn single(orbitals: Option<Arc<Orbitals>>, n_orbitals: usize, det: Determinant) -> Result<Self, DataError> {
        Self::new(orbitals, n_orbitals, vec![det], vec![1.0])
    }

    pub fn orbitals(&self) -> Option<&Arc<Orbitals>> {
        self.orbitals.as_ref()
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn determinants(&self) -> &[Determinant] {
        &self.determinants
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.determinants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.determinants.is_empty()
    }

    pub fn n_alpha(&self) -> usize {
        self.determinants[0].n_alpha()
    }

    pub fn n_beta(&self) -> usize {
        self.determinants[0].n_beta()
    }

    pub fn n_electrons(&self) -> usize {
        self.n_alpha() + self.n_beta()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Determinant, f64)> + '_ {
        self.determinants.iter().copied().zip(self.coefficients.iter().copied())
    }
}

impl Document for Wavefunction {
    const KIND: &'static str = "wavefunction";
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{from_json, to_json};

    #[test]
    fn roundtrip_and_normalization() {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let wf = Wavefunction::new(
            None,
            2,
            vec![Determinant::new(0b01, 0b01), Determinant::new(0b10, 0b10)],
            vec![c, -c],
        )
        .unwrap();
        assert_eq!(from_json::<Wavefunction>(&to_json(&wf)).unwrap(), wf);
        let half = to_json(&wf).replace(&format!("-{c}"), "0.0");
        assert!(matches!(from_json::<Wavefunction>(&half), Err(DataError::Invariant(_))));
    }

    #[test]
    fn rejects_bad_determinants() {
        let d = Determinant::new(1, 1);
        assert!(Wavefunction::new(None, 2, vec![d, d], vec![0.6, 0.8]).is_err());
        assert!(Wavefunction::new(None, 2, vec![d, Determinant::new(3, 1)], vec![0.6, 0.8]).is_err());
        assert!(Wavefunction::new(None, 1, vec![Determinant::new(2, 0)], vec![1.0]).is_err());
    }
}
