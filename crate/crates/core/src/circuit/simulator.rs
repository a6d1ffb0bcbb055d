use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng as _;

use super::{Circuit, CircuitError, Counts, Gate, GateKind, MAX_QUBITS};
use crate::data::QubitHamiltonian;
use crate::pauli::Phase;
use crate::rng::seeded;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// Dense amplitudes over `2^n` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self, CircuitError> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self, CircuitError> {
        if n_qubits > MAX_QUBITS {
            return Err(CircuitError::TooManyQubits(n_qubits));
        }
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[index] = ONE;
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn from_amplitudes(amplitudes: Vec<C>) -> Result<Self, CircuitError> {
        let n = amplitudes.len().trailing_zeros() as usize;
        if amplitudes.len() != 1 << n {
            return Err(CircuitError::WidthMismatch(amplitudes.len(), 1 << n));
        }
        if n > MAX_QUBITS {
            return Err(CircuitError::TooManyQubits(n));
        }
        Ok(Self { n_qubits: n, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply(&mut self, gate: &Gate) {
        let t = gate.target;
        let theta = gate.angle.unwrap_or(0.0);
        let half = theta / 2.0;
        let m: [[C; 2]; 2] = match gate.kind {
            GateKind::X | GateKind::CX => [[ZERO, ONE], [ONE, ZERO]],
            GateKind::Y => [[ZERO, -I], [I, ZERO]],
            GateKind::Z | GateKind::CZ => [[ONE, ZERO], [ZERO, -ONE]],
            GateKind::H => {
                let r = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [[r, r], [r, -r]]
            }
            GateKind::S => [[ONE, ZERO], [ZERO, I]],
            GateKind::Sdg => [[ONE, ZERO], [ZERO, -I]],
            GateKind::RX => {
                let (c, s) = (C::new(half.cos(), 0.0), C::new(0.0, -half.sin()));
                [[c, s], [s, c]]
            }
            GateKind::RY => {
                let (c, s) = (C::new(half.cos(), 0.0), C::new(half.sin(), 0.0));
                [[c, -s], [s, c]]
            }
            GateKind::RZ | GateKind::CRZ => [[C::from_polar(1.0, -half), ZERO], [ZERO, C::from_polar(1.0, half)]],
            GateKind::Phase | GateKind::CPhase => [[ONE, ZERO], [ZERO, C::from_polar(1.0, theta)]],
        };
        let control_mask = gate.control.map_or(0, |c| 1usize << c);
        let bit = 1usize << t;
        let diagonal = m[0][1] == ZERO && m[1][0] == ZERO;
        let amps = &mut self.amplitudes;
        for i0 in 0..amps.len() {
            if i0 & bit != 0 || i0 & control_mask != control_mask {
                continue;
            }
            let i1 = i0 | bit;
            let (a, b) = (amps[i0], amps[i1]);
            if diagonal {
                amps[i0] = m[0][0] * a;
                amps[i1] = m[1][1] * b;
            } else {
                amps[i0] = m[0][0] * a + m[0][1] * b;
                amps[i1] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    pub fn run(&mut self, circuit: &Circuit) -> Result<(), CircuitError> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(CircuitError::WidthMismatch(circuit.n_qubits(), self.n_qubits));
        }
        for g in circuit.gates() {
            self.apply(g);
        }
        Ok(())
    }

    /// Probabilities of the measured-qubit outcomes, indexed with `qubits[k]` as bit `k`.
    pub fn marginal(&self, qubits: &[usize]) -> Vec<f64> {
        let mut p = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let mut k = 0;
            for (j, &q) in qubits.iter().enumerate() {
                k |= (i >> q & 1) << j;
            }
            p[k] += a.norm_sqr();
        }
        p
    }
}

/// Final state of `circuit` from `|0…0⟩`.
pub fn simulate(circuit: &Circuit) -> Result<StateVector, CircuitError> {
    let mut s = StateVector::zero(circuit.n_qubits())?;
    s.run(circuit)?;
    Ok(s)
}

pub fn simulate_from(circuit: &Circuit, initial: StateVector) -> Result<StateVector, CircuitError> {
    let mut s = initial;
    s.run(circuit)?;
    Ok(s)
}

/// Dense unitary of `circuit`, column `j` the image of basis state `j`.
pub fn unitary(circuit: &Circuit) -> Result<DMatrix<C>, CircuitError> {
    let n = circuit.n_qubits();
    let dim = 1usize << n;
    if n > 12 {
        return Err(CircuitError::TooManyQubits(n));
    }
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let s = simulate_from(circuit, StateVector::basis(n, j)?)?;
        m.set_column(j, &DVector::from_vec(s.into_amplitudes()));
    }
    Ok(m)
}

/// Draws `shots` outcomes of the circuit's measured qubits.
pub fn sample(circuit: &Circuit, shots: u64, seed: u64) -> Result<Counts, CircuitError> {
    let state = simulate(circuit)?;
    sample_state(&state, circuit.measured(), shots, seed)
}

/// Samples measured qubits of a prepared state with a ChaCha8 stream seeded by `seed`.
pub fn sample_state(state: &StateVector, measured: &[usize], shots: u64, seed: u64) -> Result<Counts, CircuitError> {
    if measured.is_empty() {
        return Err(CircuitError::NoMeasuredQubits);
    }
    if shots == 0 {
        return Err(CircuitError::ZeroShots);
    }
    let probs = state.marginal(measured);
    let total: f64 = probs.iter().sum();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p / total;
        cumulative.push(acc);
    }
    let mut rng = seeded(seed);
    let mut tallies = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.random();
        // Rounding can leave the last cumulative value just below 1.
        let mut k = cumulative.partition_point(|&c| c <= u).min(probs.len() - 1);
        while probs[k] == 0.0 && k > 0 {
            k -= 1;
        }
        tallies[k] += 1;
    }
    let width = measured.len();
    let counts: BTreeMap<String, u64> = tallies
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| ((0..width).rev().map(|j| if k >> j & 1 == 1 { '1' } else { '0' }).collect(), c))
        .collect();
    Ok(Counts::new(counts, shots, seed).expect("tallies sum to shots"))
}

/// `⟨ψ|H|ψ⟩` via `P|b⟩ = i^{x·z} (−1)^{b·z} |b ⊕ x⟩`.
pub fn expectation(state: &StateVector, h: &QubitHamiltonian) -> Result<f64, CircuitError> {
    if state.n_qubits() != h.n_qubits() {
        return Err(CircuitError::WidthMismatch(state.n_qubits(), h.n_qubits()));
    }
    let amps = state.amplitudes();
    let mut total = C::new(0.0, 0.0);
    for (p, c) in h.terms() {
        let x = p.x_bits() as usize;
        let z = p.z_bits() as usize;
        let prefactor = Phase::from_exponent(p.y_count() as i64).to_complex();
        let mut acc = C::new(0.0, 0.0);
        for (b, a) in amps.iter().enumerate() {
            let v = amps[b ^ x].conj() * a;
            if (b & z).count_ones() % 2 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        total += prefactor * acc * *c;
    }
    debug_assert!(total.im.abs() < 1e-8, "Hermitian expectation has imaginary part {}", total.im);
    Ok(total.re)
}
