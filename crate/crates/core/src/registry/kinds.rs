//! Built-in algorithm kinds: marker types, interfaces and typed `run` entry points.

use std::sync::Arc;

use super::{AlgorithmKind, Instance, Settings};
use crate::circuit::{Circuit, Counts};
use crate::data::{FermionHamiltonian, Orbitals, QubitHamiltonian, Structure, Wavefunction};
use crate::estimate::EstimationResult;
use crate::qpe::{PauliRotationSequence, PhaseResult, QpeComponents};
use crate::Result;

macro_rules! kind {
    ($(#[$m:meta])* $marker:ident, $name:literal, $iface:ident) => {
        $(#[$m])*
        pub struct $marker;

        impl AlgorithmKind for $marker {
            const NAME: &'static str = $name;
            type Interface = dyn $iface;
        }
    };
}

pub trait ScfSolver: Send + Sync {
    /// Total energy and reference determinant.
    fn run(&self, structure: &Structure, charge: i64, spin_multiplicity: u32, basis: &str, settings: &Settings) -> Result<(f64, Wavefunction)>;
}

pub trait ActiveSpaceSelector: Send + Sync {
    /// Reference wavefunction over the selected active orbitals.
    fn run(&self, wavefunction: &Wavefunction, settings: &Settings) -> Result<Wavefunction>;
}

pub trait HamiltonianConstructor: Send + Sync {
    fn run(&self, orbitals: &Arc<Orbitals>, settings: &Settings) -> Result<FermionHamiltonian>;
}

pub trait MultiConfigurationCalculator: Send + Sync {
    fn run(&self, hamiltonian: &FermionHamiltonian, n_alpha: usize, n_beta: usize, settings: &Settings) -> Result<(f64, Wavefunction)>;
}

pub trait QubitMapper: Send + Sync {
    fn run(&self, hamiltonian: &FermionHamiltonian, settings: &Settings) -> Result<QubitHamiltonian>;
}

pub trait StatePrep: Send + Sync {
    fn run(&self, wavefunction: &Wavefunction, settings: &Settings) -> Result<Circuit>;
}

pub trait TimeEvolutionBuilder: Send + Sync {
    /// Approximation of `exp(−iHt)`.
    fn run(&self, hamiltonian: &QubitHamiltonian, time: f64, settings: &Settings) -> Result<PauliRotationSequence>;
}

pub trait ControlledEvolutionMapper: Send + Sync {
    /// Controlled `U^power` with the control one above the system register.
    fn run(&self, sequence: &PauliRotationSequence, power: usize, settings: &Settings) -> Result<Circuit>;
}

pub trait CircuitExecutor: Send + Sync {
    fn run(&self, circuit: &Circuit, shots: u64, seed: u64, settings: &Settings) -> Result<Counts>;
}

pub trait PhaseEstimation: Send + Sync {
    fn run(&self, state_preparation: &Circuit, hamiltonian: &QubitHamiltonian, parts: &QpeComponents<'_>, settings: &Settings) -> Result<PhaseResult>;
}

pub trait Estimator: Send + Sync {
    /// `reference` feeds the classical prefilter.
    fn run(&self, state_preparation: &Circuit, hamiltonian: &QubitHamiltonian, reference: &Wavefunction, settings: &Settings) -> Result<EstimationResult>;
}

kind!(ScfSolverKind, "scf_solver", ScfSolver);
kind!(ActiveSpaceSelectorKind, "active_space_selector", ActiveSpaceSelector);
kind!(HamiltonianConstructorKind, "hamiltonian_constructor", HamiltonianConstructor);
kind!(MultiConfigurationCalculatorKind, "multi_configuration_calculator", MultiConfigurationCalculator);
kind!(QubitMapperKind, "qubit_mapper", QubitMapper);
kind!(StatePrepKind, "state_prep", StatePrep);
kind!(TimeEvolutionBuilderKind, "time_evolution_builder", TimeEvolutionBuilder);
kind!(ControlledEvolutionMapperKind, "controlled_evolution_circuit_mapper", ControlledEvolutionMapper);
kind!(CircuitExecutorKind, "circuit_executor", CircuitExecutor);
kind!(PhaseEstimationKind, "phase_estimation", PhaseEstimation);
kind!(EstimatorKind, "estimator", Estimator);

/// Names of the built-in kinds in pipeline order.
pub const BUILTIN_KINDS: [&str; 11] = [
    ScfSolverKind::NAME,
    ActiveSpaceSelectorKind::NAME,
    HamiltonianConstructorKind::NAME,
    MultiConfigurationCalculatorKind::NAME,
    QubitMapperKind::NAME,
    StatePrepKind::NAME,
    TimeEvolutionBuilderKind::NAME,
    ControlledEvolutionMapperKind::NAME,
    CircuitExecutorKind::NAME,
    PhaseEstimationKind::NAME,
    EstimatorKind::NAME,
];

impl Instance<ScfSolverKind> {
    pub fn run(&self, structure: &Structure, charge: i64, spin_multiplicity: u32, basis: &str) -> Result<(f64, Wavefunction)> {
        self.invoke(|i, s| i.run(structure, charge, spin_multiplicity, basis, s))
    }
}

impl Instance<ActiveSpaceSelectorKind> {
    pub fn run(&self, wavefunction: &Wavefunction) -> Result<Wavefunction> {
        self.invoke(|i, s| i.run(wavefunction, s))
    }
}

impl Instance<HamiltonianConstructorKind> {
    pub fn run(&self, orbitals: &Arc<Orbitals>) -> Result<FermionHamiltonian> {
        self.invoke(|i, s| i.run(orbitals, s))
    }
}

impl Instance<MultiConfigurationCalculatorKind> {
    pub fn run(&self, hamiltonian: &FermionHamiltonian, n_alpha: usize, n_beta: usize) -> Result<(f64, Wavefunction)> {
        self.invoke(|i, s| i.run(hamiltonian, n_alpha, n_beta, s))
    }
}

impl Instance<QubitMapperKind> {
    pub fn run(&self, hamiltonian: &FermionHamiltonian) -> Result<QubitHamiltonian> {
        self.invoke(|i, s| i.run(hamiltonian, s))
    }
}

impl Instance<StatePrepKind> {
    pub fn run(&self, wavefunction: &Wavefunction) -> Result<Circuit> {
        self.invoke(|i, s| i.run(wavefunction, s))
    }
}

impl Instance<TimeEvolutionBuilderKind> {
    pub fn run(&self, hamiltonian: &QubitHamiltonian, time: f64) -> Result<PauliRotationSequence> {
        self.invoke(|i, s| i.run(hamiltonian, time, s))
    }
}

impl Instance<ControlledEvolutionMapperKind> {
    pub fn run(&self, sequence: &PauliRotationSequence, power: usize) -> Result<Circuit> {
        self.invoke(|i, s| i.run(sequence, power, s))
    }
}

impl Instance<CircuitExecutorKind> {
    pub fn run(&self, circuit: &Circuit, shots: u64, seed: u64) -> Result<Counts> {
        self.invoke(|i, s| i.run(circuit, shots, seed, s))
    }
}

impl Instance<PhaseEstimationKind> {
    pub fn run(
        &self,
        state_preparation: &Circuit,
        hamiltonian: &QubitHamiltonian,
        executor: &Instance<CircuitExecutorKind>,
        evolution_builder: &Instance<TimeEvolutionBuilderKind>,
        circuit_mapper: &Instance<ControlledEvolutionMapperKind>,
    ) -> Result<PhaseResult> {
        let parts = QpeComponents {
            build_evolution: Box::new(|h, t| evolution_builder.run(h, t)),
            map_controlled: Box::new(|seq, p| circuit_mapper.run(seq, p)),
            execute: Box::new(|c, shots, seed| executor.run(c, shots, seed)),
        };
        let result = self.invoke(|i, s| i.run(state_preparation, hamiltonian, &parts, s))?;
        Ok(result.with_settings(self.settings.to_map()))
    }
}

impl Instance<EstimatorKind> {
    pub fn run(&self, state_preparation: &Circuit, hamiltonian: &QubitHamiltonian, reference: &Wavefunction) -> Result<EstimationResult> {
        let result = self.invoke(|i, s| i.run(state_preparation, hamiltonian, reference, s))?;
        Ok(result.with_settings(self.settings.to_map()))
    }
}
