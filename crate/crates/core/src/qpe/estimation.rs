use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{build_trotter, map_controlled_evolution, phase_to_energy, PauliRotationSequence, QpeError};
use crate::circuit::{self, Circuit, CircuitError, Counts, Gate, MAX_QUBITS};
use crate::data::{Document, QubitHamiltonian};
use crate::rng::derive_seed;

type BuildFn<'a> = Box<dyn Fn(&QubitHamiltonian, f64) -> crate::Result<PauliRotationSequence> + 'a>;
type MapFn<'a> = Box<dyn Fn(&PauliRotationSequence, usize) -> crate::Result<Circuit> + 'a>;
type ExecFn<'a> = Box<dyn Fn(&Circuit, u64, u64) -> crate::Result<Counts> + 'a>;

/// The interchangeable pieces a phase-estimation run is assembled from.
pub struct QpeComponents<'a> {
    /// `(H, t)` to a rotation sequence approximating `exp(−iHt)`.
    pub build_evolution: BuildFn<'a>,
    /// `(U, power)` to controlled `U^power`, control on the top qubit.
    pub map_controlled: MapFn<'a>,
    /// `(circuit, shots, seed)` to counts over the measured qubits.
    pub execute: ExecFn<'a>,
}

impl QpeComponents<'static> {
    /// Trotter builder, Pauli-sequence mapper and the state-vector sampler.
    pub fn native(steps: usize, order: u32) -> Self {
        Self {
            build_evolution: Box::new(move |h, t| Ok(build_trotter(h, t, steps, order)?)),
            map_controlled: Box::new(|seq, p| Ok(map_controlled_evolution(seq, p)?)),
            execute: Box::new(|c, shots, seed| Ok(circuit::sample(c, shots, seed)?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpeParameters {
    pub num_bits: usize,
    pub evolution_time: f64,
    /// Shots in total (standard) or per round (iterative).
    pub shots: u64,
    pub seed: u64,
}

impl QpeParameters {
    fn validate(&self) -> Result<(), QpeError> {
        if !(1..=12).contains(&self.num_bits) {
            return Err(QpeError::InvalidBits(self.num_bits));
        }
        if !(self.evolution_time > 0.0 && self.evolution_time.is_finite()) {
            return Err(QpeError::InvalidTime(self.evolution_time));
        }
        if self.shots == 0 {
            return Err(QpeError::InvalidShots);
        }
        Ok(())
    }
}

/// Outcome of a phase-estimation run.
///
/// `histogram` holds one entry for standard QPE (all ancilla outcomes) and
/// one entry per round for iterative QPE, in execution order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PhaseResultRaw")]
pub struct PhaseResult {
    variant: String,
    bits: String,
    phase: f64,
    raw_energy: f64,
    evolution_time: f64,
    histogram: Vec<Counts>,
    shots: u64,
    seed: u64,
    settings: serde_json::Map<String, serde_json::Value>,
}

#[derive(Deserialize)]
struct PhaseResultRaw {
    variant: String,
    bits: String,
    phase: f64,
    raw_energy: f64,
    evolution_time: f64,
    histogram: Vec<Counts>,
    shots: u64,
    seed: u64,
    #[serde(default)]
    settings: serde_json::Map<String, serde_json::Value>,
}

impl TryFrom<PhaseResultRaw> for PhaseResult {
    type Error = String;

    fn try_from(r: PhaseResultRaw) -> Result<Self, String> {
        let fail = |m: &str| format!("invariant violation: {m}");
        let phase = bits_to_phase(&r.bits).ok_or_else(|| fail("bits must be a nonempty binary string"))?;
        if phase != r.phase {
            return Err(fail("phase does not match bits"));
        }
        let e = phase_to_energy(phase, r.evolution_time).map_err(|e| fail(&e.to_string()))?;
        if (e - r.raw_energy).abs() > 1e-12 * e.abs().max(1.0) {
            return Err(fail("raw_energy does not match phase"));
        }
        Ok(Self {
            variant: r.variant,
            bits: r.bits,
            phase,
            raw_energy: e,
            evolution_time: r.evolution_time,
            histogram: r.histogram,
            shots: r.shots,
            seed: r.seed,
            settings: r.settings,
        })
    }
}

fn bits_to_phase(bits: &str) -> Option<f64> {
    if bits.is_empty() || bits.len() > 52 {
        return None;
    }
    let mut phase = 0.0;
    let mut w = 0.5;
    for c in bits.chars() {
        match c {
            '1' => phase += w,
            '0' => {}
            _ => return None,
        }
        w /= 2.0;
    }
    Some(phase)
}

impl PhaseResult {
    fn new(variant: &str, bits: String, params: &QpeParameters, histogram: Vec<Counts>) -> Result<Self, QpeError> {
        let phase = bits_to_phase(&bits).ok_or_else(|| QpeError::BadCounts(bits.clone()))?;
        Ok(Self {
            variant: variant.to_owned(),
            raw_energy: phase_to_energy(phase, params.evolution_time)?,
            bits,
            phase,
            evolution_time: params.evolution_time,
            histogram,
            shots: params.shots,
            seed: params.seed,
            settings: serde_json::Map::new(),
        })
    }

    /// Attaches the settings snapshot of the algorithm that produced it.
    pub fn with_settings(mut self, settings: serde_json::Map<String, serde_json::Value>) -> Self {
        self.settings = settings;
        self
    }

    pub fn variant(&self) -> &str {
        &self.variant
    }

    /// Phase bits, most significant first.
    pub fn bits(&self) -> &str {
        &self.bits
    }

    pub fn num_bits(&self) -> usize {
        self.bits.len()
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn raw_energy(&self) -> f64 {
        self.raw_energy
    }

    pub fn evolution_time(&self) -> f64 {
        self.evolution_time
    }

    pub fn histogram(&self) -> &[Counts] {
        &self.histogram
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn settings(&self) -> &serde_json::Map<String, serde_json::Value> {
        &self.settings
    }
}

impl Document for PhaseResult {
    const KIND: &'static str = "phase_result";
}

/// Quantum Fourier transform `|k⟩ → 2^{−m/2} Σ_y e^{2πiky/2^m} |y⟩` on `m` qubits.
pub fn qft(m: usize) -> Circuit {
    let mut c = Circuit::new(m);
    let mut push = |g| c.push(g).map(|_| ()).expect("qubits are in range by construction");
    for i in (0..m).rev() {
        push(Gate::h(i));
        for j in (0..i).rev() {
            push(Gate::cphase(j, i, PI / (1u64 << (i - j)) as f64));
        }
    }
    for i in 0..m / 2 {
        let (a, b) = (i, m - 1 - i);
        push(Gate::cx(a, b));
        push(Gate::cx(b, a));
        push(Gate::cx(a, b));
    }
    c
}

pub fn inverse_qft(m: usize) -> Circuit {
    qft(m).inverse()
}

fn check_widths(prep: &Circuit, h: &QubitHamiltonian, total: usize) -> Result<(), QpeError> {
    if prep.n_qubits() != h.n_qubits() {
        return Err(QpeError::WidthMismatch { expected: h.n_qubits(), found: prep.n_qubits() });
    }
    if total > MAX_QUBITS {
        return Err(CircuitError::TooManyQubits(total).into());
    }
    Ok(())
}

/// Controlled `U^power` with its control moved to `ancilla`.
fn controlled_power(
    parts: &QpeComponents<'_>,
    seq: &PauliRotationSequence,
    power: usize,
    n_system: usize,
    ancilla: usize,
) -> crate::Result<Vec<Gate>> {
    let cu = (parts.map_controlled)(seq, power)?;
    if cu.n_qubits() != n_system + 1 {
        return Err(QpeError::from(CircuitError::WidthMismatch(n_system + 1, cu.n_qubits())).into());
    }
    Ok(cu.gates().iter().map(|g| g.remapped(|q| if q == n_system { ancilla } else { q })).collect())
}

/// Textbook phase estimation with `num_bits` ancillas above the system register.
pub fn run_standard_qpe(
    state_preparation: &Circuit,
    h: &QubitHamiltonian,
    parts: &QpeComponents<'_>,
    params: &QpeParameters,
) -> crate::Result<PhaseResult> {
    params.validate()?;
    let n = h.n_qubits();
    let m = params.num_bits;
    check_widths(state_preparation, h, n + m)?;
    let seq = (parts.build_evolution)(h, params.evolution_time)?;
    let mut c = Circuit::new(n + m);
    c.append(state_preparation, 0)?;
    c.extend((0..m).map(|j| Gate::h(n + j)))?;
    for j in 0..m {
        c.extend(controlled_power(parts, &seq, 1 << j, n, n + j)?)?;
    }
    c.append(&inverse_qft(m), n)?;
    c.measure(&(n..n + m).collect::<Vec<_>>())?;
    let counts = (parts.execute)(&c, params.shots, params.seed)?;
    let bits = counts.modal().ok_or_else(|| QpeError::BadCounts("empty histogram".into()))?.to_owned();
    if bits.len() != m {
        return Err(QpeError::BadCounts(format!("expected {m}-bit outcomes, got {bits:?}")).into());
    }
    Ok(PhaseResult::new("standard", bits, params, vec![counts])?)
}

/// Single-ancilla phase estimation, least significant bit first, with
/// classical feedback between rounds and a majority vote per round.
pub fn run_iterative_qpe(
    state_preparation: &Circuit,
    h: &QubitHamiltonian,
    parts: &QpeComponents<'_>,
    params: &QpeParameters,
) -> crate::Result<PhaseResult> {
    params.validate()?;
    let n = h.n_qubits();
    let m = params.num_bits;
    check_widths(state_preparation, h, n + 1)?;
    let seq = (parts.build_evolution)(h, params.evolution_time)?;
    // bits[k-1] is φ_k, the k-th binary digit after the point.
    let mut bits = vec![false; m];
    let mut histogram = Vec::with_capacity(m);
    for k in (1..=m).rev() {
        let mut c = Circuit::new(n + 1);
        c.append(state_preparation, 0)?;
        c.push(Gate::h(n))?;
        c.extend(controlled_power(parts, &seq, 1 << (k - 1), n, n)?)?;
        let omega: f64 = (k + 1..=m).filter(|&j| bits[j - 1]).map(|j| -2.0 * PI / (1u64 << (j - k + 1)) as f64).sum();
        if omega != 0.0 {
            c.push(Gate::rz(n, omega))?;
        }
        c.push(Gate::h(n))?;
        c.measure(&[n])?;
        let counts = (parts.execute)(&c, params.shots, derive_seed(params.seed, k as u64))?;
        let (zeros, ones) = (counts.get("0"), counts.get("1"));
        if zeros + ones != counts.shots() {
            return Err(QpeError::BadCounts(format!("round {k} returned non single-bit outcomes")).into());
        }
        bits[k - 1] = ones > zeros;
        histogram.push(counts);
    }
    let bits: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
    Ok(PhaseResult::new("iterative", bits, params, histogram)?)
}
