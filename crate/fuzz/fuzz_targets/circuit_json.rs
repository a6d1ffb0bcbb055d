#![no_main]

use libfuzzer_sys::fuzz_target;
use qchemflow::circuit::{sample, simulate, Circuit};
use qchemflow::data::from_json;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(c) = from_json::<Circuit>(text) else { return };
    if c.n_qubits() > 10 || c.len() > 500 {
        return;
    }
    let psi = simulate(&c).expect("a validated circuit simulates");
    let norm: f64 = psi.amplitudes().iter().map(|a| a.norm_sqr()).sum();
    assert!((norm - 1.0).abs() < 1e-9, "norm {norm}");
    let _ = sample(&c, 8, 0);
});
