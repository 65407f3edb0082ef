#![no_main]

use libfuzzer_sys::fuzz_target;
use sturm_glm::{glm, validate_spectral_data, SpectralData};

// Parsed and validated data must never panic the kernel assembly. The grid
// and count stay small so each run is cheap.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(parsed) = SpectralData::from_json(text) else { return };
    if parsed.len() > 64 || !validate_spectral_data(&parsed).ok {
        return;
    }
    let Ok(phi) = glm::assemble_phi(&parsed, 16) else { return };
    let f = glm::kernel_f(&phi, parsed.kind());
    let margin = glm::positivity_margin(&f);
    assert!(!margin.is_nan());
});
