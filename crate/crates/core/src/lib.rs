//! Modular ground-state energy workflow for small molecules.
//!
//! The pipeline runs a geometry through restricted Hartree–Fock, active-space
//! selection and CASCI, then encodes the active-space Hamiltonian on qubits and
//! estimates its ground-state energy with Trotterized phase estimation or with
//! shot-based measurement on a built-in state-vector simulator.
//!
//! Every intermediate quantity is an immutable data object ([`data`]) and every
//! stage is an interchangeable algorithm obtained by name from the factory
//! [`registry`]. New implementations, and new kinds of algorithm, can be
//! registered at runtime and are used through exactly the same code paths as
//! the built-ins.
//!
//! ```
//! use qchemflow::data::Structure;
//! use qchemflow::registry::{self, kinds::ScfSolverKind};
//!
//! let h2 = Structure::new(&["H", "H"], &[[0.0, 0.0, 0.0], [0.0, 0.0, 1.4]]).unwrap();
//! let scf = registry::create::<ScfSolverKind>(Some("native"), &[]).unwrap();
//! let (energy, _wfn) = scf.run(&h2, 0, 1, "sto-3g").unwrap();
//! assert!((energy + 1.11675).abs() < 1e-4);
//! ```

pub mod activespace;
pub mod casci;
pub mod circuit;
pub mod data;
pub mod error;
pub mod estimate;
pub mod pauli;
pub mod qpe;
pub mod qubitmap;
pub mod registry;
pub mod rng;
pub mod scf;
pub mod stateprep;
pub mod workflow;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};

/// Version string recorded in every result document.
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");
