//! Immutable domain data shared by all workflow stages, and their JSON form.
//!
//! Every document is wrapped in a `{"kind": ..., "version": 1, ...}`
//! envelope. Floats are written in shortest round-trip form, so a load of a
//! saved document reproduces every value bit-for-bit.

mod element;
mod hamiltonian;
mod matrix;
mod orbitals;
mod qubit;
mod structure;
mod wavefunction;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

pub use element::Element;
pub use hamiltonian::FermionHamiltonian;
pub use orbitals::{ActiveSpace, Orbitals};
pub use qubit::QubitHamiltonian;
pub use structure::{parse_xyz, Structure, ANGSTROM_TO_BOHR};
pub use wavefunction::{Determinant, Wavefunction};

pub(crate) use matrix::dmatrix_serde;
pub(crate) use wavefunction::low_bits;

/// Schema version written into every envelope.
pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("malformed XYZ: {0}")]
    MalformedXyz(String),
    #[error("XYZ atom count {expected} does not match {found} coordinate rows")]
    CountMismatch { expected: usize, found: usize },
    #[error("unknown element symbol {0:?}")]
    UnknownElement(String),
    #[error("unsupported element {0} (only H through Ne)")]
    UnsupportedElement(String),
    #[error("line {line}: non-numeric coordinate {value:?}")]
    InvalidCoordinate { line: usize, value: String },
    #[error("malformed document: {0}")]
    Json(String),
    #[error("expected a {expected:?} document, found {found:?}")]
    KindMismatch { expected: String, found: String },
    #[error("unsupported schema version {0}")]
    UnsupportedVersion(u64),
    #[error("invariant violation: {0}")]
    Invariant(String),
}

/// A type with a JSON envelope.
pub trait Document: Serialize + DeserializeOwned {
    const KIND: &'static str;
}

/// Serializes `value` with its envelope.
pub fn to_json<T: Document>(value: &T) -> String {
    serde_json::to_string(&to_value(value)).expect("document serialization cannot fail")
}

/// Pretty-printed variant of [`to_json`].
pub fn to_json_pretty<T: Document>(value: &T) -> String {
    serde_json::to_string_pretty(&to_value(value)).expect("document serialization cannot fail")
}

pub fn to_value<T: Document>(value: &T) -> Value {
    let body = serde_json::to_value(value).expect("document serialization cannot fail");
    let mut map = serde_json::Map::new();
    map.insert("kind".into(), Value::from(T::KIND));
    map.insert("version".into(), Value::from(SCHEMA_VERSION));
    match body {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("value".into(), other);
        }
    }
    Value::Object(map)
}

/// Parses a document of kind `T`, checking envelope and invariants.
pub fn from_json<T: Document>(text: &str) -> Result<T, DataError> {
    let value: Value = serde_json::from_str(text).map_err(|e| DataError::Json(e.to_string()))?;
    from_value(value)
}

pub fn from_value<T: Document>(value: Value) -> Result<T, DataError> {
    let Value::Object(mut map) = value else {
        return Err(DataError::Json("document must be a JSON object".into()));
    };
    let kind = map
        .remove("kind")
        .ok_or_else(|| DataError::Json("missing \"kind\" field".into()))?;
    let kind = kind
        .as_str()
        .ok_or_else(|| DataError::Json("\"kind\" must be a string".into()))?;
    if kind != T::KIND {
        return Err(DataError::KindMismatch { expected: T::KIND.into(), found: kind.into() });
    }
    let version = map
        .remove("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| DataError::Json("missing or non-integer \"version\" field".into()))?;
    if version != SCHEMA_VERSION {
        return Err(DataError::UnsupportedVersion(version));
    }
    serde_json::from_value(Value::Object(map)).map_err(classify)
}

/// Invariant failures surface through serde as custom errors; recover them.
fn classify(e: serde_json::Error) -> DataError {
    let msg = e.to_string();
    match msg.strip_prefix("invariant violation: ") {
        Some(rest) => DataError::Invariant(rest.to_string()),
        None => DataError::Json(msg),
    }
}
