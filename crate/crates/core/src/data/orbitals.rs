use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{dmatrix_serde, DataError, Document};
use crate::scf::basis::BasisSet;
use crate::scf::integrals::overlap_matrix;

const ORTHONORMALITY_TOL: f64 = 1e-8;

/// Core/active/virtual split of the molecular orbitals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveSpace {
    pub core: Vec<usize>,
    pub active: Vec<usize>,
    #[serde(rename = "virtual")]
    pub virtuals: Vec<usize>,
    pub n_active_alpha: usize,
    pub n_active_beta: usize,
}

impl ActiveSpace {
    pub fn n_active_electrons(&self) -> usize {
        self.n_active_alpha + self.n_active_beta
    }
}

/// Restricted molecular orbitals over an AO basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OrbitalsRaw")]
pub struct Orbitals {
    basis: BasisSet,
    charge: i64,
    #[serde(with = "dmatrix_serde")]
    coefficients: DMatrix<f64>,
    energies: Vec<f64>,
    occupations: Vec<u8>,
    active_space: Option<ActiveSpace>,
}

#[derive(Deserialize)]
struct OrbitalsRaw {
    basis: BasisSet,
    charge: i64,
    #[serde(with = "dmatrix_serde")]
    coefficients: DMatrix<f64>,
    energies: Vec<f64>,
    occupations: Vec<u8>,
    active_space: Option<ActiveSpace>,
}

impl TryFrom<OrbitalsRaw> for Orbitals {
    type Error = DataError;

    fn try_from(r: OrbitalsRaw) -> Result<Self, DataError> {
        Orbitals::new(r.basis, r.charge, r.coefficients, r.energies, r.occupations, r.active_space)
    }
}

impl Orbitals {
    /// Validates orthonormality, occupations and the partition.
    pub fn new(
        basis: BasisSet,
        charge: i64,
        coefficients: DMatrix<f64>,
        energies: Vec<f64>,
        occupations: Vec<u8>,
        active_space: Option<ActiveSpace>,
    ) -> Result<Self, DataError> {
        let n_ao = basis.n_ao();
        let n_mo = coefficients.ncols();
        if coefficients.nrows() != n_ao {
            return Err(DataError::Invariant(format!(
                "coefficient matrix has {} rows for {n_ao} AOs",
                coefficients.nrows()
            )));
        }
        if energies.len() != n_mo || occupations.len() != n_mo {
            return Err(DataError::Invariant("energies/occupations length differs from MO count".into()));
        }
        if occupations.iter().any(|&o| o > 2) {
            return Err(DataError::Invariant("occupations must be 0, 1 or 2".into()));
        }
        let electrons = basis.structure().total_nuclear_charge() - charge;
        let occupied: i64 = occupations.iter().map(|&o| o as i64).sum();
        if occupied != electrons {
            return Err(DataError::Invariant(format!(
                "occupations sum to {occupied} but the structure has {electrons} electrons"
            )));
        }
        if coefficients.iter().chain(&energies).any(|v| !v.is_finite()) {
            return Err(DataError::Invariant("non-finite orbital data".into()));
        }
        let s = overlap_matrix(&basis);
        let metric = coefficients.transpose() * s * &coefficients;
        let err = (metric - DMatrix::identity(n_mo, n_mo)).amax();
        if err > ORTHONORMALITY_TOL {
            return Err(DataError::Invariant(format!("orbitals not orthonormal (max deviation {err:e})")));
        }
        if let Some(space) = &active_space {
            check_partition(space, &occupations)?;
        }
        Ok(Self { basis, charge, coefficients, energies, occupations, active_space })
    }

    /// Same orbitals with a new partition.
    pub fn with_active_space(&self, space: ActiveSpace) -> Result<Self, DataError> {
        check_partition(&space, &self.occupations)?;
        Ok(Self { active_space: Some(space), ..self.clone() })
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn charge(&self) -> i64 {
        self.charge
    }

    /// AO × MO coefficient matrix.
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn occupations(&self) -> &[u8] {
        &self.occupations
    }

    pub fn n_mo(&self) -> usize {
        self.coefficients.ncols()
    }

    pub fn n_electrons(&self) -> usize {
        self.occupations.iter().map(|&o| o as usize).sum()
    }

    pub fn active_space(&self) -> Option<&ActiveSpace> {
        self.active_space.as_ref()
    }
}

fn check_partition(space: &ActiveSpace, occupations: &[u8]) -> Result<(), DataError> {
    let n = occupations.len();
    let mut seen = vec![false; n];
    for &i in space.core.iter().chain(&space.active).chain(&space.virtuals) {
        if i >= n {
            return Err(DataError::Invariant(format!("partition index {i} out of range for {n} MOs")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(DataError::Invariant(format!("MO {i} appears twice in the partition")));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(DataError::Invariant("partition does not cover every MO".into()));
    }
    if space.n_active_alpha > space.active.len() || space.n_active_beta > space.active.len() {
        return Err(DataError::Invariant("more active electrons than active orbitals allow".into()));
    }
    let total: usize = occupations.iter().map(|&o| o as usize).sum();
    if 2 * space.core.len() + space.n_active_electrons() > total {
        return Err(DataError::Invariant("core and active electrons exceed the electron count".into()));
    }
    Ok(())
}

impl Document for Orbitals {
    const KIND: &'static str = "orbitals";
}
