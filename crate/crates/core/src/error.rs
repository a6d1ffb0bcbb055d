use thiserror::Error;

use crate::activespace::ActiveSpaceError;
use crate::casci::CasciError;
use crate::circuit::CircuitError;
use crate::data::DataError;
use crate::estimate::EstimateError;
use crate::pauli::PauliError;
use crate::qpe::QpeError;
use crate::qubitmap::MappingError;
use crate::registry::RegistryError;
use crate::scf::ScfError;
use crate::stateprep::StatePrepError;

/// Any failure raised by a workflow stage.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Scf(#[from] ScfError),
    #[error(transparent)]
    ActiveSpace(#[from] ActiveSpaceError),
    #[error(transparent)]
    Casci(#[from] CasciError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    StatePrep(#[from] StatePrepError),
    #[error(transparent)]
    Qpe(#[from] QpeError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    /// Raised by plugin implementations that have their own failure modes.
    #[error("{0}")]
    Other(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
