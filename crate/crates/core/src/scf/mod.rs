//! STO-3G integrals and the restricted Hartree–Fock solver.

pub mod basis;
mod boys;
pub mod integrals;
mod rhf;

use thiserror::Error;

pub use basis::{build_basis, BasisSet, Shell};
pub use integrals::{compute_integrals, overlap_matrix, AoIntegrals, Eri};
pub use rhf::{run_rhf, run_rhf_with, RhfOptions, RhfSolution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScfError {
    #[error("unsupported basis {0:?} (available: sto-3g)")]
    UnsupportedBasis(String),
    #[error("element {0} has no basis data")]
    UnsupportedElement(String),
    #[error("unsupported SCF variant: {0}")]
    UnsupportedVariant(String),
    #[error("SCF did not converge in {iterations} iterations (residual {residual:e}, last energy change {delta_e:e})")]
    NotConverged { iterations: usize, residual: f64, delta_e: f64 },
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
}
