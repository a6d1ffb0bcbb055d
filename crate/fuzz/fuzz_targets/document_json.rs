#![no_main]

use libfuzzer_sys::fuzz_target;
use qchemflow::circuit::{Circuit, Counts};
use qchemflow::data::{from_json, to_json, Document, FermionHamiltonian, Orbitals, QubitHamiltonian, Structure, Wavefunction};
use qchemflow::estimate::EstimationResult;
use qchemflow::qpe::{PauliRotationSequence, PhaseResult};
use qchemflow::registry::Settings;

/// Anything that loads must serialize back to a document that loads to the same value.
fn check<T: Document + PartialEq + std::fmt::Debug>(text: &str) {
    if let Ok(v) = from_json::<T>(text) {
        let again = to_json(&v);
        let back: T = from_json(&again).expect("reload of a serialized document");
        assert_eq!(back, v);
    }
}

fuzz_target!(|data: &[u8]| {
    let Some((&selector, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    match selector % 11 {
        0 => check::<Structure>(text),
        1 => check::<Orbitals>(text),
        2 => check::<Wavefunction>(text),
        3 => check::<FermionHamiltonian>(text),
        4 => check::<QubitHamiltonian>(text),
        5 => check::<Circuit>(text),
        6 => check::<Counts>(text),
        7 => check::<PauliRotationSequence>(text),
        8 => check::<PhaseResult>(text),
        9 => check::<EstimationResult>(text),
        _ => {
            // Settings carry an atomic lock flag and are compared by their JSON text.
            if let Ok(v) = from_json::<Settings>(text) {
                let again = to_json(&v);
                assert_eq!(to_json(&from_json::<Settings>(&again).unwrap()), again);
            }
        }
    }
});
