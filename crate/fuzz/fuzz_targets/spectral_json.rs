#![no_main]

use libfuzzer_sys::fuzz_target;
use sturm_glm::{validate_spectral_data, SpectralData};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(parsed) = SpectralData::from_json(text) {
        // Whatever parses must survive a write/read cycle unchanged.
        let again = SpectralData::from_json(&parsed.to_json()).expect("re-parse");
        assert_eq!(parsed, again);
        let _ = validate_spectral_data(&parsed).to_json();
    }
});
