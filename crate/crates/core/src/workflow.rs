//! Config-driven pipeline: SCF, active space, Hamiltonian, CASCI, truncation,
//! qubit mapping, state preparation, then phase estimation or shot-based
//! estimation.
//!
//! The config holds one optional object per algorithm kind,
//! `{"impl": name, "settings": {...}}`. Missing stages take the registered
//! default. A top-level `seed` overrides the seed of the final stage.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::casci::{prune, truncate};
use crate::data::{to_value, ActiveSpace, Structure};
use crate::estimate::EstimationResult;
use crate::qpe::PhaseResult;
use crate::qubitmap::Encoding;
use crate::registry::kinds::*;
use crate::registry::{create, AlgorithmKind, Instance, RegistryError, Value};
use crate::stateprep::ZERO_AMPLITUDE;
use crate::TOOLKIT_VERSION;

#[derive(Debug, Error)]
pub enum WorkflowError {
    #[error("config: {0}")]
    Config(String),
    #[error("config: {kind}: {source}")]
    Registry { kind: &'static str, source: RegistryError },
    #[error("stage {stage} failed: {source}")]
    Stage { stage: &'static str, source: Box<crate::Error> },
}

impl WorkflowError {
    /// Process exit code: 2 for config problems, 1 for stage failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            WorkflowError::Config(_) | WorkflowError::Registry { .. } => 2,
            WorkflowError::Stage { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    #[serde(rename = "impl", default, skip_serializing_if = "Option::is_none")]
    pub implementation: Option<String>,
    #[serde(default)]
    pub settings: Map<String, Json>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncateConfig {
    /// Keep this many largest-|c| determinants; all nonzero ones when absent.
    #[serde(default)]
    pub max_determinants: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Qpe,
    Estimate,
}

fn default_multiplicity() -> u32 {
    1
}

fn default_basis() -> String {
    "sto-3g".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowConfig {
    #[serde(default)]
    pub charge: i64,
    #[serde(default = "default_multiplicity")]
    pub spin_multiplicity: u32,
    #[serde(default = "default_basis")]
    pub basis: String,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub truncate: TruncateConfig,
    #[serde(default)]
    pub scf_solver: StageConfig,
    #[serde(default)]
    pub active_space_selector: StageConfig,
    #[serde(default)]
    pub hamiltonian_constructor: StageConfig,
    #[serde(default)]
    pub multi_configuration_calculator: StageConfig,
    #[serde(default)]
    pub qubit_mapper: StageConfig,
    #[serde(default)]
    pub state_prep: StageConfig,
    #[serde(default)]
    pub time_evolution_builder: StageConfig,
    #[serde(default)]
    pub controlled_evolution_circuit_mapper: StageConfig,
    #[serde(default)]
    pub circuit_executor: StageConfig,
    #[serde(default)]
    pub phase_estimation: StageConfig,
    #[serde(default)]
    pub estimator: StageConfig,
}

impl Default for WorkflowConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

impl WorkflowConfig {
    pub fn from_json(text: &str) -> Result<Self, WorkflowError> {
        serde_json::from_str(text).map_err(|e| WorkflowError::Config(e.to_string()))
    }
}

/// Classical intermediate quantities recorded in the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scf_energy: f64,
    pub partition: ActiveSpace,
    pub casci_energy: f64,
    pub casci_determinants: usize,
    pub trial_determinants: usize,
    pub n_qubits: usize,
    pub n_terms: usize,
    pub state_prep_gates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FinalResult {
    Phase(PhaseResult),
    Estimation(EstimationResult),
}

impl FinalResult {
    pub fn energy(&self) -> f64 {
        match self {
            FinalResult::Phase(r) => r.raw_energy(),
            FinalResult::Estimation(r) => r.energy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowResult {
    pub summary: Summary,
    /// `(kind, {"impl", "settings"})` in pipeline order.
    pub stages: Vec<(&'static str, Json)>,
    pub result: FinalResult,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl WorkflowResult {
    pub fn energy(&self) -> f64 {
        self.result.energy()
    }

    /// Result document; `timestamp` is the only field that varies between identical runs.
    pub fn to_json_value(&self, timestamp: Option<u64>) -> Json {
        let result = match &self.result {
            FinalResult::Phase(r) => to_value(r),
            FinalResult::Estimation(r) => to_value(r),
        };
        let mut doc = json!({
            "kind": "workflow_result",
            "version": 1,
            "toolkit_version": TOOLKIT_VERSION,
            "seed": self.seed,
            "stages": self.stages.iter().map(|(k, v)| (k.to_string(), v.clone())).collect::<Map<_, _>>(),
            "summary": self.summary,
            "energy": self.energy(),
            "energy_minus_casci": self.energy() - self.summary.casci_energy,
            "result": result,
            "warnings": self.warnings,
        });
        if let Some(t) = timestamp {
            doc["timestamp"] = json!(t);
        }
        doc
    }
}

fn make<K: AlgorithmKind>(stage: &StageConfig, extra: &[(&str, Value)]) -> Result<Instance<K>, WorkflowError> {
    let mut settings: Vec<(&str, Value)> = Vec::with_capacity(stage.settings.len() + extra.len());
    for (k, v) in &stage.settings {
        let v = Value::from_json(v).ok_or_else(|| WorkflowError::Config(format!("{}: setting {k:?} must be a scalar", K::NAME)))?;
        settings.push((k.as_str(), v));
    }
    for (k, v) in extra {
        match settings.iter_mut().find(|(key, _)| key == k) {
            Some(slot) => slot.1 = v.clone(),
            None => settings.push((k, v.clone())),
        }
    }
    create::<K>(stage.implementation.as_deref(), &settings).map_err(|source| WorkflowError::Registry { kind: K::NAME, source })
}

fn stage<T>(name: &'static str, r: crate::Result<T>) -> Result<T, WorkflowError> {
    r.map_err(|e| WorkflowError::Stage { stage: name, source: Box::new(e) })
}

/// Runs the full pipeline on `structure`.
///
/// All instances are created before any computation, so config errors never
/// surface halfway through.
pub fn run_workflow(config: &WorkflowConfig, structure: &Structure, seed_override: Option<u64>) -> Result<WorkflowResult, WorkflowError> {
    let seed = seed_override.or(config.seed);
    let seed_setting: Vec<(&str, Value)> = match seed {
        Some(s) => vec![("seed", Value::Int(i64::try_from(s).map_err(|_| WorkflowError::Config(format!("seed {s} is too large")))?))],
        None => vec![],
    };
    // State preparation and the estimator follow the mapper's encoding unless told otherwise.
    let mapper = make::<QubitMapperKind>(&config.qubit_mapper, &[])?;
    let encoding_default: Vec<(&str, Value)> = match mapper.name().parse::<Encoding>() {
        Ok(e) => vec![("encoding", Value::from(e.name()))],
        Err(_) => vec![],
    };
    let with_encoding = |s: &StageConfig| {
        let explicit = s.settings.contains_key("encoding");
        if explicit { vec![] } else { encoding_default.clone() }
    };

    let scf = make::<ScfSolverKind>(&config.scf_solver, &[])?;
    let selector = make::<ActiveSpaceSelectorKind>(&config.active_space_selector, &[])?;
    let constructor = make::<HamiltonianConstructorKind>(&config.hamiltonian_constructor, &[])?;
    let mc = make::<MultiConfigurationCalculatorKind>(&config.multi_configuration_calculator, &[])?;
    let prep_alg = make::<StatePrepKind>(&config.state_prep, &with_encoding(&config.state_prep))?;
    if config.truncate.max_determinants == Some(0) {
        return Err(WorkflowError::Config("truncate.max_determinants must be at least 1".into()));
    }

    enum Tail {
        Qpe(
            Instance<TimeEvolutionBuilderKind>,
            Instance<ControlledEvolutionMapperKind>,
            Instance<CircuitExecutorKind>,
            Instance<PhaseEstimationKind>,
        ),
        Estimate(Instance<EstimatorKind>),
    }
    let tail = match config.method {
        Method::Qpe => Tail::Qpe(
            make(&config.time_evolution_builder, &[])?,
            make(&config.controlled_evolution_circuit_mapper, &[])?,
            make(&config.circuit_executor, &[])?,
            make(&config.phase_estimation, &seed_setting)?,
        ),
        Method::Estimate => {
            let mut extra = with_encoding(&config.estimator);
            extra.extend(seed_setting.iter().cloned());
            Tail::Estimate(make(&config.estimator, &extra)?)
        }
    };

    let (scf_energy, reference) = stage("scf_solver", scf.run(structure, config.charge, config.spin_multiplicity, &config.basis))?;
    log::info!("SCF energy {scf_energy:.10}");
    let active = stage("active_space_selector", selector.run(&reference))?;
    let orbitals = active
        .orbitals()
        .cloned()
        .ok_or_else(|| WorkflowError::Stage { stage: "active_space_selector", source: Box::new(crate::Error::Other("selector returned no orbitals".into())) })?;
    let partition = orbitals.active_space().cloned().ok_or_else(|| WorkflowError::Stage {
        stage: "active_space_selector",
        source: Box::new(crate::Error::Other("selector returned no active space".into())),
    })?;
    let fermion = stage("hamiltonian_constructor", constructor.run(&orbitals))?;
    let (casci_energy, ci) = stage("multi_configuration_calculator", mc.run(&fermion, partition.n_active_alpha, partition.n_active_beta))?;
    log::info!("CASCI energy {casci_energy:.10} over {} determinants", ci.len());
    let trial = match config.truncate.max_determinants {
        Some(k) => stage("truncate", truncate(&ci, k).map_err(Into::into))?,
        None => ci.clone(),
    };
    let trial = stage("truncate", prune(&trial, ZERO_AMPLITUDE).map_err(Into::into))?;
    let qubit = stage("qubit_mapper", mapper.run(&fermion))?;
    let prep = stage("state_prep", prep_alg.run(&trial))?;

    let mut warnings = Vec::new();
    let mut stages: Vec<(&'static str, Json)> = vec![
        (ScfSolverKind::NAME, scf.snapshot()),
        (ActiveSpaceSelectorKind::NAME, selector.snapshot()),
        (HamiltonianConstructorKind::NAME, constructor.snapshot()),
        (MultiConfigurationCalculatorKind::NAME, mc.snapshot()),
        ("truncate", json!({ "settings": { "max_determinants": config.truncate.max_determinants } })),
        (QubitMapperKind::NAME, mapper.snapshot()),
        (StatePrepKind::NAME, prep_alg.snapshot()),
    ];
    let (result, seed) = match &tail {
        Tail::Qpe(builder, cmapper, executor, pe) => {
            if let Ok(t) = pe.settings().real("evolution_time") {
                if casci_energy.abs() * t >= std::f64::consts::PI {
                    let w = format!("|E_CASCI|·t = {:.4} ≥ π: the phase aliases and the energy will be wrong", casci_energy.abs() * t);
                    log::warn!("{w}");
                    warnings.push(w);
                }
            }
            let r = stage("phase_estimation", pe.run(&prep, &qubit, executor, builder, cmapper))?;
            stages.push((TimeEvolutionBuilderKind::NAME, builder.snapshot()));
            stages.push((ControlledEvolutionMapperKind::NAME, cmapper.snapshot()));
            stages.push((CircuitExecutorKind::NAME, executor.snapshot()));
            stages.push((PhaseEstimationKind::NAME, pe.snapshot()));
            let seed = r.seed();
            (FinalResult::Phase(r), seed)
        }
        Tail::Estimate(est) => {
            let r = stage("estimator", est.run(&prep, &qubit, &trial))?;
            stages.push((EstimatorKind::NAME, est.snapshot()));
            let seed = r.seed();
            (FinalResult::Estimation(r), seed)
        }
    };
    Ok(WorkflowResult {
        summary: Summary {
            scf_energy,
            partition,
            casci_energy,
            casci_determinants: ci.len(),
            trial_determinants: trial.len(),
            n_qubits: qubit.n_qubits(),
            n_terms: qubit.len(),
            state_prep_gates: prep.len(),
        },
        stages,
        result,
        seed,
        warnings,
    })
}
