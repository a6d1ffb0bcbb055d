//! Trotterized time evolution, controlled-evolution circuits and phase estimation.
//!
//! Phases follow `U = exp(−iHt)`: an eigenvalue `E` appears as the phase
//! fraction `φ = −Et/2π mod 1`.

mod estimation;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Gate};
use crate::data::{Document, QubitHamiltonian};
use crate::pauli::{Letter, PauliString};

pub use estimation::{inverse_qft, qft, run_iterative_qpe, run_standard_qpe, PhaseResult, QpeComponents, QpeParameters};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpeError {
    #[error("Trotter order {0} is not supported (use 1 or 2)")]
    UnsupportedOrder(u32),
    #[error("Trotter steps must be at least 1")]
    InvalidSteps,
    #[error("evolution time must be positive and finite, got {0}")]
    InvalidTime(f64),
    #[error("power must be at least 1")]
    InvalidPower,
    #[error("num_bits must be in 1..=12, got {0}")]
    InvalidBits(usize),
    #[error("shots must be at least 1")]
    InvalidShots,
    #[error("state preparation acts on {found} qubits but the Hamiltonian has {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("measurement record is missing or malformed: {0}")]
    BadCounts(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Ordered Pauli rotations `Π_j exp(−i θ_j P_j / 2)` times `e^{i φ_global}`.
///
/// The first rotation in the list acts first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliRotationSequence {
    n_qubits: usize,
    rotations: Vec<(PauliString, f64)>,
    global_phase: f64,
    time: f64,
    steps: usize,
}

impl PauliRotationSequence {
    pub fn new(n_qubits: usize, rotations: Vec<(PauliString, f64)>, global_phase: f64, time: f64, steps: usize) -> Result<Self, QpeError> {
        for (p, theta) in &rotations {
            if p.n_qubits() != n_qubits {
                return Err(QpeError::WidthMismatch { expected: n_qubits, found: p.n_qubits() });
            }
            if !theta.is_finite() {
                return Err(QpeError::InvalidTime(*theta));
            }
        }
        Ok(Self { n_qubits, rotations, global_phase, time, steps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn rotations(&self) -> &[(PauliString, f64)] {
        &self.rotations
    }

    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

impl Document for PauliRotationSequence {
    const KIND: &'static str = "pauli_rotation_sequence";
}

/// Product-formula approximation of `exp(−iHt)`.
///
/// Terms are swept in lexicographic order; the identity term becomes the
/// global phase `−c_I t`.
pub fn build_trotter(h: &QubitHamiltonian, time: f64, steps: usize, order: u32) -> Result<PauliRotationSequence, QpeError> {
    if steps == 0 {
        return Err(QpeError::InvalidSteps);
    }
    if !time.is_finite() {
        return Err(QpeError::InvalidTime(time));
    }
    let terms: Vec<(PauliString, f64)> = h.terms().iter().filter(|(p, _)| !p.is_identity()).copied().collect();
    let dt = time / steps as f64;
    let mut rotations = Vec::new();
    match order {
        1 => {
            for _ in 0..steps {
                rotations.extend(terms.iter().map(|&(p, c)| (p, 2.0 * c * dt)));
            }
        }
        2 => {
            for _ in 0..steps {
                rotations.extend(terms.iter().map(|&(p, c)| (p, c * dt)));
                rotations.extend(terms.iter().rev().map(|&(p, c)| (p, c * dt)));
            }
        }
        o => return Err(QpeError::UnsupportedOrder(o)),
    }
    PauliRotationSequence::new(h.n_qubits(), rotations, -h.identity_coefficient() * time, time, steps)
}

/// Controlled `U^power` with the control on qubit `n_qubits` (one above the system).
pub fn map_controlled_evolution(seq: &PauliRotationSequence, power: usize) -> Result<Circuit, QpeError> {
    if power == 0 {
        return Err(QpeError::InvalidPower);
    }
    let n = seq.n_qubits();
    let ancilla = n;
    let mut body = Circuit::new(n + 1);
    for (p, theta) in seq.rotations() {
        controlled_rotation(&mut body, p, *theta, ancilla)?;
    }
    let mut out = Circuit::new(n + 1);
    for _ in 0..power {
        out.append(&body, 0)?;
    }
    let phase = wrap_angle(seq.global_phase() * power as f64);
    if phase != 0.0 {
        out.push(Gate::phase(ancilla, phase))?;
    }
    Ok(out)
}

/// Reduces an angle to (−π, π].
fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Controlled `exp(−iθP/2)`: basis change, CX fan-in to the top support
/// qubit, CRZ from the control, then uncompute.
fn controlled_rotation(out: &mut Circuit, p: &PauliString, theta: f64, control: usize) -> Result<(), CircuitError> {
    let support: Vec<usize> = (0..p.n_qubits()).filter(|&q| p.letter(q) != Letter::I).collect();
    let Some(&last) = support.last() else {
        // exp(−iθI/2) is a control-dependent phase.
        out.push(Gate::phase(control, -theta / 2.0))?;
        return Ok(());
    };
    let mut change = Vec::new();
    for &q in &support {
        match p.letter(q) {
            Letter::X => change.push(Gate::h(q)),
            Letter::Y => {
                change.push(Gate::sdg(q));
                change.push(Gate::h(q));
            }
            _ => {}
        }
    }
    let ladder: Vec<Gate> = support[..support.len() - 1].iter().map(|&q| Gate::cx(q, last)).collect();
    out.extend(change.iter().copied())?;
    out.extend(ladder.iter().copied())?;
    out.push(Gate::crz(control, last, theta))?;
    out.extend(ladder.iter().rev().copied())?;
    out.extend(change.iter().rev().map(Gate::inverse))?;
    Ok(())
}

/// `E = −2π·wrap(φ)/t`, with `wrap` taking `φ > ½` to the negative side.
pub fn phase_to_energy(phase: f64, time: f64) -> Result<f64, QpeError> {
    if !(time > 0.0 && time.is_finite()) {
        return Err(QpeError::InvalidTime(time));
    }
    let f = phase.rem_euclid(1.0);
    let wrapped = if f > 0.5 { f - 1.0 } else { f };
    Ok(-2.0 * PI * wrapped / time)
}
