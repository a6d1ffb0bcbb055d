//! Gate-level circuits, a dense state-vector simulator and seeded sampling.
//!
//! Qubit 0 is the least significant bit of a basis-state index.

mod simulator;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Document;

pub use simulator::{expectation, sample, sample_state, simulate, simulate_from, unitary, StateVector};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("{0} qubits exceed the simulator cap of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("gate {gate:?} addresses qubit {qubit} in a {n_qubits}-qubit circuit")]
    QubitOutOfRange { gate: GateKind, qubit: usize, n_qubits: usize },
    #[error("gate {0:?} uses the same qubit as control and target")]
    SameQubit(GateKind),
    #[error("gate {0:?} has a missing, superfluous or non-finite angle")]
    BadAngle(GateKind),
    #[error("gate {0:?} has a missing or superfluous control")]
    BadControl(GateKind),
    #[error("no measured qubits declared")]
    NoMeasuredQubits,
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("width mismatch: {0} vs {1} qubits")]
    WidthMismatch(usize, usize),
}

#[allow(clippy::upper_case_acronyms)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    RX,
    RY,
    RZ,
    Phase,
    CX,
    CZ,
    CRZ,
    CPhase,
}

impl GateKind {
    pub fn is_controlled(self) -> bool {
        matches!(self, GateKind::CX | GateKind::CZ | GateKind::CRZ | GateKind::CPhase)
    }

    pub fn has_angle(self) -> bool {
        matches!(self, GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::Phase | GateKind::CRZ | GateKind::CPhase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    #[serde(rename = "gate")]
    pub kind: GateKind,
    pub target: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

macro_rules! simple {
    ($($name:ident => $kind:ident),*) => {$(
        pub fn $name(target: usize) -> Self {
            Self { kind: GateKind::$kind, target, control: None, angle: None }
        }
    )*};
}

macro_rules! rotation {
    ($($name:ident => $kind:ident),*) => {$(
        pub fn $name(target: usize, angle: f64) -> Self {
            Self { kind: GateKind::$kind, target, control: None, angle: Some(angle) }
        }
    )*};
}

impl Gate {
    simple!(x => X, y => Y, z => Z, h => H, s => S, sdg => Sdg);
    rotation!(rx => RX, ry => RY, rz => RZ, phase => Phase);

    pub fn cx(control: usize, target: usize) -> Self {
        Self { kind: GateKind::CX, target, control: Some(control), angle: None }
    }

    pub fn cz(control: usize, target: usize) -> Self {
        Self { kind: GateKind::CZ, target, control: Some(control), angle: None }
    }

    pub fn crz(control: usize, target: usize, angle: f64) -> Self {
        Self { kind: GateKind::CRZ, target, control: Some(control), angle: Some(angle) }
    }

    pub fn cphase(control: usize, target: usize, angle: f64) -> Self {
        Self { kind: GateKind::CPhase, target, control: Some(control), angle: Some(angle) }
    }

    pub fn inverse(&self) -> Self {
        let kind = match self.kind {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            k => k,
        };
        Self { kind, angle: self.angle.map(|a| -a), ..*self }
    }

    /// Same gate with qubits relabelled through `map`.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Self {
        Self { target: map(self.target), control: self.control.map(&map), ..*self }
    }

    fn validate(&self, n_qubits: usize) -> Result<(), CircuitError> {
        let k = self.kind;
        if self.angle.is_some() != k.has_angle() || self.angle.is_some_and(|a| !a.is_finite()) {
            return Err(CircuitError::BadAngle(k));
        }
        if self.control.is_some() != k.is_controlled() {
            return Err(CircuitError::BadControl(k));
        }
        for q in std::iter::once(self.target).chain(self.control) {
            if q >= n_qubits {
                return Err(CircuitError::QubitOutOfRange { gate: k, qubit: q, n_qubits });
            }
        }
        if self.control == Some(self.target) {
            return Err(CircuitError::SameQubit(k));
        }
        Ok(())
    }
}

/// Ordered gate list on a fixed register, with optional measured qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitRaw")]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    #[serde(default)]
    measured: Vec<usize>,
}

#[derive(Deserialize)]
struct CircuitRaw {
    n_qubits: usize,
    gates: Vec<Gate>,
    #[serde(default)]
    measured: Vec<usize>,
}

impl TryFrom<CircuitRaw> for Circuit {
    type Error = String;

    fn try_from(r: CircuitRaw) -> Result<Self, String> {
        let mut c = Circuit::new(r.n_qubits);
        c.extend(r.gates).map_err(|e| format!("invariant violation: {e}"))?;
        c.measure(&r.measured).map_err(|e| format!("invariant violation: {e}"))?;
        Ok(c)
    }
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new(), measured: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self, CircuitError> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<&mut Self, CircuitError> {
        for g in gates {
            self.push(g)?;
        }
        Ok(self)
    }

    /// Appends `other`, whose qubit `q` lands on `offset + q`.
    pub fn append(&mut self, other: &Circuit, offset: usize) -> Result<&mut Self, CircuitError> {
        if other.n_qubits + offset > self.n_qubits {
            return Err(CircuitError::WidthMismatch(self.n_qubits, other.n_qubits + offset));
        }
        self.extend(other.gates.iter().map(|g| g.remapped(|q| q + offset)))
    }

    /// Declares the measured qubits, replacing any previous list.
    pub fn measure(&mut self, qubits: &[usize]) -> Result<&mut Self, CircuitError> {
        for &q in qubits {
            if q >= self.n_qubits {
                return Err(CircuitError::QubitOutOfRange { gate: GateKind::Z, qubit: q, n_qubits: self.n_qubits });
            }
        }
        self.measured = qubits.to_vec();
        Ok(self)
    }

    pub fn measure_all(&mut self) -> &mut Self {
        self.measured = (0..self.n_qubits).collect();
        self
    }

    /// Daggered gate sequence; measurements are not carried over.
    pub fn inverse(&self) -> Circuit {
        Circuit { n_qubits: self.n_qubits, gates: self.gates.iter().rev().map(Gate::inverse).collect(), measured: Vec::new() }
    }

    /// Same gates on a wider register.
    pub fn widened(&self, n_qubits: usize) -> Result<Circuit, CircuitError> {
        let mut c = Circuit::new(n_qubits);
        c.append(self, 0)?;
        c.measured = self.measured.clone();
        Ok(c)
    }

    /// Number of gates of each kind.
    pub fn gate_counts(&self) -> BTreeMap<GateKind, usize> {
        let mut m = BTreeMap::new();
        for g in &self.gates {
            *m.entry(g.kind).or_insert(0) += 1;
        }
        m
    }

    /// Gates acting on two qubits.
    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.control.is_some()).count()
    }
}

impl PartialOrd for GateKind {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GateKind {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (*self as u8).cmp(&(*other as u8))
    }
}

impl Document for Circuit {
    const KIND: &'static str = "circuit";
}

/// Measurement outcomes keyed by bitstring, last measured qubit leftmost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CountsRaw")]
pub struct Counts {
    counts: BTreeMap<String, u64>,
    shots: u64,
    seed: u64,
}

#[derive(Deserialize)]
struct CountsRaw {
    counts: BTreeMap<String, u64>,
    shots: u64,
    seed: u64,
}

impl TryFrom<CountsRaw> for Counts {
    type Error = String;

    fn try_from(r: CountsRaw) -> Result<Self, String> {
        Counts::new(r.counts, r.shots, r.seed).map_err(|e| format!("invariant violation: {e}"))
    }
}

impl Counts {
    pub fn new(counts: BTreeMap<String, u64>, shots: u64, seed: u64) -> Result<Self, String> {
        if counts.values().sum::<u64>() != shots {
            return Err("counts do not sum to the shot total".into());
        }
        let width = counts.keys().next().map_or(0, String::len);
        if counts.keys().any(|k| k.len() != width || !k.chars().all(|c| c == '0' || c == '1')) {
            return Err("bitstrings must be equal-length and binary".into());
        }
        Ok(Self { counts, shots, seed })
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn get(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Most frequent bitstring; ties go to the smaller bitstring.
    pub fn modal(&self) -> Option<&str> {
        let mut best: Option<(&String, u64)> = None;
        for (k, &v) in &self.counts {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((k, v));
            }
        }
        best.map(|(k, _)| k.as_str())
    }
}

impl Document for Counts {
    const KIND: &'static str = "counts";
}
