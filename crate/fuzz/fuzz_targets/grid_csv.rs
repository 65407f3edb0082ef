#![no_main]

use libfuzzer_sys::fuzz_target;
use sturm_glm::GridFunction;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = GridFunction::from_csv(text) {
        assert!(g.intervals() >= 1);
        assert!(g.values().iter().all(|v| v.is_finite()));
        let again = GridFunction::from_csv(&g.to_csv()).expect("re-parse");
        assert_eq!(g, again);
    }
});
