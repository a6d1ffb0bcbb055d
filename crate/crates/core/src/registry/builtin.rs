use std::sync::Arc;

use super::kinds::*;
use super::{AlgorithmKind, Registry, RegistryError, SettingSpec, Settings};
use crate::activespace::{active_reference, compute_valence_space_parameters, construct_hamiltonian, select_manual, select_valence, ActiveSpaceError};
use crate::casci::{solve_casci_with, CasciOptions, DavidsonOptions};
use crate::circuit::{self, Circuit, Counts};
use crate::data::{FermionHamiltonian, Orbitals, QubitHamiltonian, Structure, Wavefunction};
use crate::estimate::{classical_prefilter, estimate_energy, group_qubitwise_commuting, EstimateOptions, EstimationResult};
use crate::qpe::{self, PauliRotationSequence, PhaseResult, QpeComponents, QpeParameters};
use crate::qubitmap::{map_fermion_to_qubit, Encoding};
use crate::scf::{run_rhf_with, RhfOptions};
use crate::stateprep::prepare_sparse;
use crate::Result;

fn add<K: AlgorithmKind>(r: &mut Registry, name: &str, schema: Vec<SettingSpec>, is_default: bool, ctor: impl Fn() -> Box<K::Interface> + Send + Sync + 'static) {
    r.insert::<K>(name, schema, is_default, Arc::new(ctor)).expect("built-in names are unique");
}

pub(super) fn register_all(r: &mut Registry) {
    add::<ScfSolverKind>(r, "native", scf_schema(), true, || Box::new(NativeScf));
    add::<ActiveSpaceSelectorKind>(r, "valence", valence_schema(), true, || Box::new(Valence));
    add::<ActiveSpaceSelectorKind>(r, "manual", manual_schema(), false, || Box::new(Manual));
    add::<HamiltonianConstructorKind>(r, "native", vec![], true, || Box::new(NativeHamiltonian));
    add::<MultiConfigurationCalculatorKind>(r, "casci", casci_schema(), true, || Box::new(Casci));
    for enc in Encoding::ALL {
        add::<QubitMapperKind>(r, enc.name(), vec![], enc == Encoding::JordanWigner, move || Box::new(Mapper(enc)));
    }
    add::<StatePrepKind>(r, "sparse_merge", state_prep_schema(), true, || Box::new(SparseMerge));
    add::<StatePrepKind>(r, "sparse_isometry_gf2x", state_prep_schema(), false, || Box::new(SparseMerge));
    add::<TimeEvolutionBuilderKind>(r, "trotter", trotter_schema(), true, || Box::new(Trotter));
    add::<ControlledEvolutionMapperKind>(r, "pauli_sequence", vec![], true, || Box::new(PauliSequence));
    add::<CircuitExecutorKind>(r, "native_full_state", vec![], true, || Box::new(FullState));
    add::<PhaseEstimationKind>(r, "iterative", qpe_schema(51), true, || Box::new(Qpe { iterative: true }));
    add::<PhaseEstimationKind>(r, "standard", qpe_schema(100), false, || Box::new(Qpe { iterative: false }));
    add::<EstimatorKind>(r, "qwc", qwc_schema(), true, || Box::new(Qwc));
}

fn nonnegative(s: &Settings, key: &str) -> Result<u64> {
    Ok(s.int_in(key, 0, i64::MAX)? as u64)
}

fn positive(s: &Settings, key: &str) -> Result<usize> {
    Ok(s.int_in(key, 1, i64::MAX)? as usize)
}

fn encoding(s: &Settings) -> Result<Encoding> {
    Ok(s.str("encoding")?.parse::<Encoding>()?)
}

fn scf_schema() -> Vec<SettingSpec> {
    vec![
        SettingSpec::new("max_iterations", 128, "SCF iteration cap"),
        SettingSpec::new("convergence_threshold", 1e-8, "threshold on the commutator norm ||FDS - SDF||"),
        SettingSpec::new("energy_threshold", 1e-10, "threshold on the energy change between iterations"),
        SettingSpec::new("diis_history", 8, "DIIS subspace size (0 disables DIIS)"),
    ]
}

struct NativeScf;

impl ScfSolver for NativeScf {
    fn run(&self, structure: &Structure, charge: i64, spin_multiplicity: u32, basis: &str, s: &Settings) -> Result<(f64, Wavefunction)> {
        let diis_history = s.int_in("diis_history", 0, 64)? as usize;
        let opts = RhfOptions {
            max_iterations: positive(s, "max_iterations")?,
            residual_tol: s.real("convergence_threshold")?,
            energy_tol: s.real("energy_threshold")?,
            diis_history,
            diis_start: if diis_history == 0 { usize::MAX } else { RhfOptions::default().diis_start },
            ..RhfOptions::default()
        };
        let sol = run_rhf_with(structure, charge, spin_multiplicity, basis, &opts)?;
        Ok((sol.energy, sol.wavefunction()))
    }
}

fn valence_schema() -> Vec<SettingSpec> {
    vec![
        SettingSpec::new("num_active_electrons", -1, "active electrons; -1 takes the valence count"),
        SettingSpec::new("num_active_orbitals", -1, "active orbitals; -1 takes the valence count"),
    ]
}

struct Valence;

impl ActiveSpaceSelector for Valence {
    fn run(&self, wf: &Wavefunction, s: &Settings) -> Result<Wavefunction> {
        let (mut n_e, mut n_o) = (s.int_in("num_active_electrons", -1, i64::MAX)?, s.int_in("num_active_orbitals", -1, i64::MAX)?);
        if n_e < 0 || n_o < 0 {
            let orbitals = wf.orbitals().ok_or(ActiveSpaceError::MissingOrbitals)?;
            let (e, o) = compute_valence_space_parameters(wf, orbitals.charge())?;
            if n_e < 0 {
                n_e = e as i64;
            }
            if n_o < 0 {
                n_o = o as i64;
            }
        }
        Ok(select_valence(wf, n_e as usize, n_o as usize)?)
    }
}

fn manual_schema() -> Vec<SettingSpec> {
    vec![
        SettingSpec::new("core_orbitals", "", "comma-separated MO indices kept doubly occupied"),
        SettingSpec::new("active_orbitals", "", "comma-separated MO indices forming the active space"),
    ]
}

fn parse_indices(s: &Settings, key: &str) -> Result<Vec<usize>> {
    s.str(key)?
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| RegistryError::InvalidSetting { key: key.to_owned(), reason: format!("{t:?} is not an orbital index") }.into())
        })
        .collect()
}

struct Manual;

impl ActiveSpaceSelector for Manual {
    fn run(&self, wf: &Wavefunction, s: &Settings) -> Result<Wavefunction> {
        let orbitals = wf.orbitals().ok_or(ActiveSpaceError::MissingOrbitals)?;
        let selected = select_manual(orbitals, &parse_indices(s, "core_orbitals")?, &parse_indices(s, "active_orbitals")?)?;
        Ok(active_reference(Arc::new(selected))?)
    }
}

struct NativeHamiltonian;

impl HamiltonianConstructor for NativeHamiltonian {
    fn run(&self, orbitals: &Arc<Orbitals>, _: &Settings) -> Result<FermionHamiltonian> {
        Ok(construct_hamiltonian(orbitals)?)
    }
}

fn casci_schema() -> Vec<SettingSpec> {
    vec![
        SettingSpec::new("dense_limit", 2000, "largest CI dimension diagonalized densely"),
        SettingSpec::new("davidson_tolerance", 1e-8, "Davidson residual norm threshold"),
        SettingSpec::new("davidson_max_iterations", 500, "Davidson iteration cap"),
    ]
}

struct Casci;

impl MultiConfigurationCalculator for Casci {
    fn run(&self, h: &FermionHamiltonian, n_alpha: usize, n_beta: usize, s: &Settings) -> Result<(f64, Wavefunction)> {
        let opts = CasciOptions {
            dense_limit: nonnegative(s, "dense_limit")? as usize,
            davidson: DavidsonOptions {
                residual_tol: s.real("davidson_tolerance")?,
                max_iterations: positive(s, "davidson_max_iterations")?,
                ..DavidsonOptions::default()
            },
        };
        Ok(solve_casci_with(h, n_alpha, n_beta, &opts)?)
    }
}

struct Mapper(Encoding);

impl QubitMapper for Mapper {
    fn run(&self, h: &FermionHamiltonian, _: &Settings) -> Result<QubitHamiltonian> {
        Ok(map_fermion_to_qubit(h, self.0)?)
    }
}

fn state_prep_schema() -> Vec<SettingSpec> {
    vec![SettingSpec::new("encoding", "jordan_wigner", "fermion-to-qubit encoding of the target state")]
}

struct SparseMerge;

impl StatePrep for SparseMerge {
    fn run(&self, wf: &Wavefunction, s: &Settings) -> Result<Circuit> {
        Ok(prepare_sparse(wf, encoding(s)?)?)
    }
}

fn trotter_schema() -> Vec<SettingSpec> {
    vec![SettingSpec::new("steps", 4, "Trotter steps per evolution time"), SettingSpec::new("order", 1, "product-formula order (1 or 2)")]
}

struct Trotter;

impl TimeEvolutionBuilder for Trotter {
    fn run(&self, h: &QubitHamiltonian, time: f64, s: &Settings) -> Result<PauliRotationSequence> {
        Ok(qpe::build_trotter(h, time, positive(s, "steps")?, s.int_in("order", 1, 2)? as u32)?)
    }
}

struct PauliSequence;

impl ControlledEvolutionMapper for PauliSequence {
    fn run(&self, seq: &PauliRotationSequence, power: usize, _: &Settings) -> Result<Circuit> {
        Ok(qpe::map_controlled_evolution(seq, power)?)
    }
}

struct FullState;

impl CircuitExecutor for FullState {
    fn run(&self, c: &Circuit, shots: u64, seed: u64, _: &Settings) -> Result<Counts> {
        Ok(circuit::sample(c, shots, seed)?)
    }
}

fn qpe_schema(shots: i64) -> Vec<SettingSpec> {
    vec![
        SettingSpec::new("num_bits", 8, "number of phase bits"),
        SettingSpec::new("evolution_time", 0.5, "evolution time t in U = exp(-iHt)"),
        SettingSpec::new("shots", shots, "shots in total (standard) or per round (iterative)"),
        SettingSpec::new("seed", 0, "sampling seed"),
    ]
}

struct Qpe {
    iterative: bool,
}

impl PhaseEstimation for Qpe {
    fn run(&self, prep: &Circuit, h: &QubitHamiltonian, parts: &QpeComponents<'_>, s: &Settings) -> Result<PhaseResult> {
        let params = QpeParameters {
            num_bits: s.int_in("num_bits", 1, 12)? as usize,
            evolution_time: s.real("evolution_time")?,
            shots: s.int_in("shots", 1, i64::MAX)? as u64,
            seed: nonnegative(s, "seed")?,
        };
        if self.iterative {
            qpe::run_iterative_qpe(prep, h, parts, &params)
        } else {
            qpe::run_standard_qpe(prep, h, parts, &params)
        }
    }
}

fn qwc_schema() -> Vec<SettingSpec> {
    vec![
        SettingSpec::new("shots_per_group", 1000, "shots per measurement group"),
        SettingSpec::new("seed", 0, "sampling seed"),
        SettingSpec::new("exact", false, "use exact outcome probabilities instead of sampling"),
        SettingSpec::new("prefilter_threshold", 0.0, "terms with |c<P>_ref| below this are evaluated classically"),
        SettingSpec::new("encoding", "jordan_wigner", "encoding used to evaluate the reference state"),
    ]
}

struct Qwc;

impl Estimator for Qwc {
    fn run(&self, prep: &Circuit, h: &QubitHamiltonian, reference: &Wavefunction, s: &Settings) -> Result<EstimationResult> {
        let (reduced, offset) = classical_prefilter(h, reference, encoding(s)?, s.real("prefilter_threshold")?)?;
        let opts = EstimateOptions {
            shots_per_group: nonnegative(s, "shots_per_group")?,
            seed: nonnegative(s, "seed")?,
            exact: s.bool("exact")?,
            classical_offset: offset,
        };
        Ok(estimate_energy(prep, &group_qubitwise_commuting(&reduced), &reduced, &opts)?)
    }
}
