#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use sturm_glm::{BoundaryKind, SpectralData};

/// Exact data of `σ(x) = 2x` under Dirichlet conditions.
pub fn dd_ramp(count: usize) -> SpectralData {
    let lambda = (1..=count)
        .map(|k| ((PI * k as f64).powi(2) + 2.0).sqrt())
        .collect();
    let alpha = (1..=count)
        .map(|k| 1.0 + 2.0 / (PI * k as f64).powi(2))
        .collect();
    SpectralData::new(BoundaryKind::DD, lambda, alpha).unwrap()
}

/// Exact data of `σ(x) = x`, `h = 1` for the Neumann / third-type kind.
pub fn nt_ramp(count: usize) -> SpectralData {
    let lambda = (1..=count)
        .map(|k| ((PI * (k as f64 - 1.0)).powi(2) + 1.0).sqrt())
        .collect();
    let mut alpha = vec![1.0; count];
    alpha[0] = 2.0;
    SpectralData::with_h(BoundaryKind::NT, lambda, alpha, Some(1.0)).unwrap()
}

/// Unperturbed Dirichlet spectrum with one norming constant moved.
pub fn dd_rank_one(count: usize, alpha1: f64) -> SpectralData {
    let mut alpha = vec![1.0; count];
    alpha[0] = alpha1;
    SpectralData::new(
        BoundaryKind::DD,
        SpectralData::base(BoundaryKind::DD, count)
            .unwrap()
            .lambda()
            .to_vec(),
        alpha,
    )
    .unwrap()
}

/// Reads `tests/golden/<name>.json`, or writes `value` there when
/// `STURM_GLM_BLESS` is set.
pub fn golden(name: &str, value: &[f64]) -> Vec<f64> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.json"));
    if std::env::var_os("STURM_GLM_BLESS").is_some() {
        std::fs::write(&path, sturm_glm::io::to_json_string(value)).unwrap();
    }
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| {
        panic!(
            "{}: {e}; run with STURM_GLM_BLESS=1 to create it",
            path.display()
        )
    });
    serde_json::from_str(&text).unwrap()
}
