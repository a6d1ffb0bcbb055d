#![no_main]

use libfuzzer_sys::fuzz_target;
use qchemflow::workflow::WorkflowConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = WorkflowConfig::from_json(text);
    }
});
