#![no_main]

use libfuzzer_sys::fuzz_target;
use qchemflow::pauli::PauliString;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = PauliString::from_letters(text) {
        assert_eq!(p.to_letters(), text);
        let q = PauliString::from_masks(p.n_qubits(), p.x_bits(), p.z_bits()).unwrap();
        assert_eq!(p, q);
    }
});
