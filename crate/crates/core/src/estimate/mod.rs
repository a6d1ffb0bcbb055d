//! Shot-based energy estimation with qubit-wise commuting measurement groups.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{self, Circuit, CircuitError, Counts, Gate};
use crate::data::{DataError, Document, QubitHamiltonian, Wavefunction};
use crate::pauli::{Letter, PauliString};
use crate::qubitmap::{wavefunction_to_basis_amplitudes, Encoding};
use crate::rng::derive_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("state preparation acts on {found} qubits but the Hamiltonian has {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("at least 2 shots per group are needed for a sample variance, got {0}")]
    TooFewShots(u64),
    #[error("prefilter threshold must be nonnegative, got {0}")]
    BadThreshold(f64),
    #[error("group {0} is not a valid qubit-wise commuting group for this Hamiltonian")]
    InvalidGroup(usize),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Terms measured together in one shared basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementGroup {
    /// Indices into the Hamiltonian's term list.
    pub terms: Vec<usize>,
    /// Per-qubit measurement basis; `I` marks a free qubit.
    pub basis: PauliString,
}

fn merge_basis(basis: &PauliString, p: &PauliString) -> Option<PauliString> {
    let clash = (basis.x_bits() ^ p.x_bits()) | (basis.z_bits() ^ p.z_bits());
    let both = basis.support() & p.support();
    if clash & both != 0 {
        return None;
    }
    Some(PauliString::from_masks(basis.n_qubits(), basis.x_bits() | p.x_bits(), basis.z_bits() | p.z_bits()).expect("same width"))
}

/// Greedy first-fit grouping over terms sorted by |coefficient| descending,
/// ties broken by string order. Identity terms are left out.
pub fn group_qubitwise_commuting(h: &QubitHamiltonian) -> Vec<MeasurementGroup> {
    let mut order: Vec<usize> = (0..h.len()).filter(|&i| !h.terms()[i].0.is_identity()).collect();
    order.sort_by(|&a, &b| {
        let (pa, ca) = h.terms()[a];
        let (pb, cb) = h.terms()[b];
        cb.abs().total_cmp(&ca.abs()).then(pa.cmp(&pb))
    });
    let mut groups: Vec<MeasurementGroup> = Vec::new();
    for i in order {
        let p = h.terms()[i].0;
        match groups.iter_mut().find_map(|g| merge_basis(&g.basis, &p).map(|b| (g, b))) {
            Some((g, b)) => {
                g.terms.push(i);
                g.basis = b;
            }
            None => groups.push(MeasurementGroup { terms: vec![i], basis: p }),
        }
    }
    groups
}

/// `⟨ψ|P|ψ⟩` for a real state given as sparse basis amplitudes.
fn sparse_expectation(state: &HashMap<u64, f64>, p: &PauliString) -> f64 {
    let y_phase = p.y_count() % 4;
    let mut acc = 0.0;
    for (&b, &a) in state {
        let Some(&a2) = state.get(&(b ^ p.x_bits())) else { continue };
        // P|b⟩ = i^{#Y} (−1)^{|z ∧ b|} |b ⊕ x⟩ with P = i^{x·z} X^x Z^z.
        let sign = if (p.z_bits() & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        acc += match y_phase {
            0 => sign,
            2 => -sign,
            // Purely imaginary contributions cancel for real states.
            _ => 0.0,
        } * a
            * a2;
    }
    acc
}

/// Moves terms whose reference contribution `|c·⟨P⟩_ref|` is below `threshold`
/// into a classical offset. The identity term always moves.
pub fn classical_prefilter(
    h: &QubitHamiltonian,
    reference: &Wavefunction,
    encoding: Encoding,
    threshold: f64,
) -> Result<(QubitHamiltonian, f64), EstimateError> {
    if !(threshold >= 0.0) {
        return Err(EstimateError::BadThreshold(threshold));
    }
    if 2 * reference.n_orbitals() != h.n_qubits() {
        return Err(EstimateError::WidthMismatch { expected: h.n_qubits(), found: 2 * reference.n_orbitals() });
    }
    let state: HashMap<u64, f64> = wavefunction_to_basis_amplitudes(reference, encoding).into_iter().collect();
    let mut offset = 0.0;
    let mut kept = Vec::new();
    for &(p, c) in h.terms() {
        if p.is_identity() {
            offset += c;
            continue;
        }
        let contribution = c * sparse_expectation(&state, &p);
        if contribution.abs() < threshold {
            offset += contribution;
        } else {
            kept.push((p, c));
        }
    }
    Ok((QubitHamiltonian::from_terms(h.n_qubits(), kept)?, offset))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub shots_per_group: u64,
    pub seed: u64,
    /// Use exact outcome probabilities instead of sampling.
    pub exact: bool,
    /// Energy added to the measured sum (identity and prefiltered terms).
    pub classical_offset: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { shots_per_group: 1000, seed: 0, exact: false, classical_offset: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStatistics {
    pub basis: PauliString,
    pub terms: Vec<PauliString>,
    pub coefficients: Vec<f64>,
    pub shots: u64,
    pub mean: f64,
    /// Unbiased sample variance of the per-shot group value.
    pub variance: f64,
    pub counts: Option<Counts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EstimationResultRaw")]
pub struct EstimationResult {
    energy: f64,
    /// Variance of the energy mean.
    variance: f64,
    classical_offset: f64,
    groups: Vec<GroupStatistics>,
    shots_per_group: u64,
    seed: u64,
    exact: bool,
    settings: serde_json::Map<String, serde_json::Value>,
}

#[derive(Deserialize)]
struct EstimationResultRaw {
    energy: f64,
    variance: f64,
    classical_offset: f64,
    groups: Vec<GroupStatistics>,
    shots_per_group: u64,
    seed: u64,
    exact: bool,
    #[serde(default)]
    settings: serde_json::Map<String, serde_json::Value>,
}

impl TryFrom<EstimationResultRaw> for EstimationResult {
    type Error = String;

    fn try_from(r: EstimationResultRaw) -> Result<Self, String> {
        let sum = r.classical_offset + r.groups.iter().map(|g| g.mean).sum::<f64>();
        if !(r.variance >= 0.0) || r.groups.iter().any(|g| !(g.variance >= 0.0)) {
            return Err("invariant violation: variances must be nonnegative".into());
        }
        if (sum - r.energy).abs() > 1e-10 * sum.abs().max(1.0) {
            return Err("invariant violation: energy is not offset plus group means".into());
        }
        Ok(Self {
            energy: r.energy,
            variance: r.variance,
            classical_offset: r.classical_offset,
            groups: r.groups,
            shots_per_group: r.shots_per_group,
            seed: r.seed,
            exact: r.exact,
            settings: r.settings,
        })
    }
}

impl EstimationResult {
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_error(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn classical_offset(&self) -> f64 {
        self.classical_offset
    }

    pub fn groups(&self) -> &[GroupStatistics] {
        &self.groups
    }

    pub fn shots_per_group(&self) -> u64 {
        self.shots_per_group
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn exact(&self) -> bool {
        self.exact
    }

    pub fn settings(&self) -> &serde_json::Map<String, serde_json::Value> {
        &self.settings
    }

    pub fn with_settings(mut self, settings: serde_json::Map<String, serde_json::Value>) -> Self {
        self.settings = settings;
        self
    }
}

impl Document for EstimationResult {
    const KIND: &'static str = "estimation_result";
}

/// Basis-change gates taking `basis` to the Z basis.
fn basis_rotation(basis: &PauliString) -> Vec<Gate> {
    let mut gates = Vec::new();
    for q in 0..basis.n_qubits() {
        match basis.letter(q) {
            Letter::X => gates.push(Gate::h(q)),
            Letter::Y => gates.extend([Gate::sdg(q), Gate::h(q)]),
            _ => {}
        }
    }
    gates
}

/// Per-shot value `Σ_j c_j (−1)^{|support_j ∧ outcome|}`.
fn group_value(terms: &[(PauliString, f64)], outcome: u64) -> f64 {
    terms.iter().map(|(p, c)| if (p.support() & outcome).count_ones() % 2 == 1 { -c } else { *c }).sum()
}

/// Measures every group separately and aggregates the energy and the
/// variance of its mean. Groups are treated as independent experiments.
pub fn estimate_energy(
    state_preparation: &Circuit,
    groups: &[MeasurementGroup],
    h: &QubitHamiltonian,
    options: &EstimateOptions,
) -> Result<EstimationResult, EstimateError> {
    let n = h.n_qubits();
    if state_preparation.n_qubits() != n {
        return Err(EstimateError::WidthMismatch { expected: n, found: state_preparation.n_qubits() });
    }
    if options.shots_per_group < 2 {
        return Err(EstimateError::TooFewShots(options.shots_per_group));
    }
    let shots = options.shots_per_group;
    let mut stats = Vec::with_capacity(groups.len());
    for (gi, g) in groups.iter().enumerate() {
        let mut terms = Vec::with_capacity(g.terms.len());
        for &i in &g.terms {
            let &(p, c) = h.terms().get(i).ok_or(EstimateError::InvalidGroup(gi))?;
            if p.n_qubits() != g.basis.n_qubits() || merge_basis(&g.basis, &p).as_ref() != Some(&g.basis) {
                return Err(EstimateError::InvalidGroup(gi));
            }
            terms.push((p, c));
        }
        let mut c = Circuit::new(n);
        c.append(state_preparation, 0)?;
        c.extend(basis_rotation(&g.basis))?;
        c.measure_all();
        let (mean, variance, counts) = if options.exact {
            let probs = circuit::simulate(&c)?.marginal(c.measured());
            let mean: f64 = probs.iter().enumerate().map(|(b, p)| p * group_value(&terms, b as u64)).sum();
            let var: f64 = probs.iter().enumerate().map(|(b, p)| p * (group_value(&terms, b as u64) - mean).powi(2)).sum();
            (mean, var, None)
        } else {
            let counts = circuit::sample(&c, shots, derive_seed(options.seed, gi as u64))?;
            let values: Vec<(f64, u64)> = counts
                .counts()
                .iter()
                .map(|(k, &m)| (group_value(&terms, u64::from_str_radix(k, 2).expect("binary key")), m))
                .collect();
            let mean = values.iter().map(|(v, m)| v * *m as f64).sum::<f64>() / shots as f64;
            let ss: f64 = values.iter().map(|(v, m)| (v - mean).powi(2) * *m as f64).sum();
            (mean, ss / (shots - 1) as f64, Some(counts))
        };
        stats.push(GroupStatistics {
            basis: g.basis,
            terms: terms.iter().map(|t| t.0).collect(),
            coefficients: terms.iter().map(|t| t.1).collect(),
            shots,
            mean,
            variance,
            counts,
        });
    }
    let energy = options.classical_offset + stats.iter().map(|s| s.mean).sum::<f64>();
    let variance = stats.iter().map(|s| s.variance).sum::<f64>() / shots as f64;
    Ok(EstimationResult {
        energy,
        variance,
        classical_offset: options.classical_offset,
        groups: stats,
        shots_per_group: shots,
        seed: options.seed,
        exact: options.exact,
        settings: serde_json::Map::new(),
    })
}
