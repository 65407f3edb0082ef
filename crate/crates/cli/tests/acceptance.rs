//! One line per acceptance criterion; exits non-zero if any fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use sturm_glm::analysis::{
    gauge_removed_distance, isospectral_member, riesz_condition, roundtrip_report, stability_probe,
    RieszBasis,
};
use sturm_glm::direct::{direct_spectral_data, eigenvalues, CharParams};
use sturm_glm::glm::reconstruct;
use sturm_glm::{BoundaryKind, GridFunction, SpectralData};

const BIN: &str = env!("CARGO_BIN_EXE_sturm-glm");

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn dd_ramp(count: usize) -> SpectralData {
    let lambda = (1..=count)
        .map(|k| ((PI * k as f64).powi(2) + 2.0).sqrt())
        .collect();
    let alpha = (1..=count)
        .map(|k| 1.0 + 2.0 / (PI * k as f64).powi(2))
        .collect();
    SpectralData::new(BoundaryKind::DD, lambda, alpha).unwrap()
}

fn dd_base(count: usize) -> SpectralData {
    SpectralData::base(BoundaryKind::DD, count).unwrap()
}

fn step_sigma() -> GridFunction {
    GridFunction::from_fn(256, |x| if x > 0.5 { 0.8 } else { 0.0 }).unwrap()
}

/// 17 modes on a 16-cell grid with `α_15 = α_17 = 4`: the aliased modes
/// cancel and the discrete `I + F` has eigenvalue −1/2.
fn margin_crossing() -> SpectralData {
    let mut alpha = vec![1.0; 17];
    alpha[14] = 4.0;
    alpha[16] = 4.0;
    SpectralData::new(BoundaryKind::DD, dd_base(17).lambda().to_vec(), alpha).unwrap()
}

fn sturm(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn criterion_1(dir: &Path) -> Outcome {
    std::fs::write(dir.join("base.json"), dd_base(64).to_json()).unwrap();
    let start = Instant::now();
    let (code, _, err) = sturm(
        dir,
        &[
            "inverse",
            "--input",
            "base.json",
            "--output",
            "base_sigma.csv",
            "--grid",
            "256",
        ],
    );
    let elapsed = start.elapsed().as_secs_f64();
    if code != 0 {
        return check(false, format!("exit {code}: {err}"));
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("base_sigma.json")).unwrap())
            .unwrap();
    let phi: Vec<f64> = serde_json::from_value(report["phi"].clone()).unwrap();
    let sigma =
        GridFunction::from_csv(&std::fs::read_to_string(dir.join("base_sigma.csv")).unwrap())
            .unwrap();
    let (p, s) = (max_abs(&phi), sigma.max_abs());
    check(
        p <= 1e-14 && s <= 1e-12 && elapsed < 1.0,
        format!("max|phi| = {p:.1e}, max|sigma| = {s:.1e}, {elapsed:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let sigma = GridFunction::from_fn(256, |x| 2.0 * x).unwrap();
    let d = direct_spectral_data(&sigma, 16, BoundaryKind::DD.into()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let mut el: f64 = 0.0;
    let mut ea: f64 = 0.0;
    for k in 1..=16 {
        let pk2 = (PI * k as f64).powi(2);
        el = el.max((d.lambda()[k - 1] - (pk2 + 2.0).sqrt()).abs());
        ea = ea.max((d.alpha()[k - 1] - (1.0 + 2.0 / pk2)).abs());
    }
    check(
        el <= 1e-8 && ea <= 1e-6 && elapsed < 5.0,
        format!("lambda err {el:.1e}, alpha err {ea:.1e}, {elapsed:.2} s"),
    )
}

fn ramp_error(count: usize) -> f64 {
    let r = reconstruct(&dd_ramp(count), 256).unwrap();
    let ramp = GridFunction::from_fn(256, |x| 2.0 * x).unwrap();
    gauge_removed_distance(&r.sigma(), &ramp).unwrap().1
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let e64 = ramp_error(64);
    let elapsed = start.elapsed().as_secs_f64();
    let e128 = ramp_error(128);
    check(
        e64 <= 0.1 && e128 < e64 && elapsed < 10.0,
        format!("L2 error K=64 {e64:.4e}, K=128 {e128:.4e}, {elapsed:.2} s"),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let r = roundtrip_report(&step_sigma(), 64, BoundaryKind::DD.into(), 256).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let replay = max_abs(&r.spectral_replay_errors[..10]);
    check(
        r.l2_error <= 0.15 && replay <= 1e-3 && elapsed < 30.0,
        format!(
            "L2 error {:.4e}, replay err (k<=10) {replay:.1e}, {elapsed:.2} s",
            r.l2_error
        ),
    )
}

fn criterion_5(dir: &Path) -> Outcome {
    let margins = [
        reconstruct(&dd_base(64), 256).unwrap().positivity_margin,
        reconstruct(&dd_ramp(64), 256).unwrap().positivity_margin,
        reconstruct(&dd_ramp(128), 256).unwrap().positivity_margin,
        roundtrip_report(&step_sigma(), 64, BoundaryKind::DD.into(), 256)
            .unwrap()
            .margin,
    ];
    std::fs::write(dir.join("crossing.json"), margin_crossing().to_json()).unwrap();
    let (code, _, err) = sturm(
        dir,
        &[
            "inverse",
            "--input",
            "crossing.json",
            "--output",
            "crossing_sigma.csv",
            "--grid",
            "16",
        ],
    );
    let no_file =
        !dir.join("crossing_sigma.csv").exists() && !dir.join("crossing_sigma.json").exists();
    check(
        margins.iter().all(|m| *m > 0.0) && code == 2 && no_file,
        format!(
            "margins {:?}, crossing dataset exit {code}, sigma file absent: {no_file}, stderr: {}",
            margins.map(|m| (m * 1e4).round() / 1e4),
            err.trim()
        ),
    )
}

fn criterion_6() -> Outcome {
    let residuals = [dd_base(64), dd_ramp(64), dd_ramp(128)]
        .map(|d| reconstruct(&d, 256).unwrap().factorization_residual);
    let worst = residuals.iter().fold(0.0f64, |m, r| m.max(*r));
    check(worst <= 5e-3, format!("max residual {worst:.2e}"))
}

fn criterion_7() -> Outcome {
    let lambda = dd_base(64).lambda().to_vec();
    let mut beta = vec![0.0; 64];
    beta[0] = 0.25;
    let sigma = isospectral_member(&lambda, &beta, BoundaryKind::DD, 256)
        .unwrap()
        .sigma();
    let spread = gauge_removed_distance(&sigma, &GridFunction::zeros(256).unwrap())
        .unwrap()
        .1;
    let d = direct_spectral_data(&sigma, 10, BoundaryKind::DD.into()).unwrap();
    let el = d
        .lambda()
        .iter()
        .zip(&lambda)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let ea = (d.alpha()[0] - 1.25).abs();
    check(
        spread >= 0.01 && el <= 1e-3 && ea <= 0.01,
        format!("L2 spread {spread:.3e}, lambda err {el:.1e}, alpha_1 err {ea:.1e}"),
    )
}

fn criterion_8() -> Outcome {
    let lambda: Vec<f64> = (1..=64)
        .map(|k| ((PI * (k as f64 - 1.0)).powi(2) + 1.0).sqrt())
        .collect();
    let mut alpha = vec![1.0; 64];
    alpha[0] = 2.0;
    let nt = SpectralData::new(BoundaryKind::NT, lambda.clone(), alpha).unwrap();
    let r = reconstruct(&nt, 256).unwrap();
    let h = r.h.unwrap();
    let replay = eigenvalues(&r.sigma(), 8, CharParams::with_h(BoundaryKind::NT, h)).unwrap();
    let el = replay
        .iter()
        .zip(&lambda)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let nd = reconstruct(&SpectralData::base(BoundaryKind::ND, 64).unwrap(), 256).unwrap();
    let v = nd.sigma();
    let spread = v
        .values()
        .iter()
        .fold(0.0f64, |m, x| m.max((x - v.values()[0]).abs()));
    check(
        el <= 1e-3 && spread <= 1e-10,
        format!("NT replay err {el:.1e} (h = {h:.4}), ND sigma spread {spread:.1e}"),
    )
}

fn criterion_9() -> Outcome {
    let rows = stability_probe(&dd_base(64), &[1e-3, 1e-2], 256, 0).unwrap();
    let ratio = rows[1].sigma_error / rows[0].sigma_error;
    check((5.0..=20.0).contains(&ratio), format!("ratio {ratio:.3}"))
}

fn criterion_10() -> Outcome {
    let sine: Vec<f64> = (1..=64).map(|k| PI * k as f64).collect();
    let cosine: Vec<f64> = (1..=64).map(|k| PI * (k as f64 - 0.5)).collect();
    let cs = riesz_condition(&sine, RieszBasis::Sine);
    let cc = riesz_condition(&cosine, RieszBasis::Cosine);
    let mut near = sine.clone();
    near[1] = near[0] + 1e-3;
    let cn = riesz_condition(&near, RieszBasis::Sine);
    check(
        (cs - 1.0).abs() <= 1e-10 && (cc - 1.0).abs() <= 1e-10 && cn > 1e3,
        format!("sine {cs:.12}, cosine {cc:.12}, near-duplicate {cn:.3e}"),
    )
}

fn criterion_11(dir: &Path) -> Outcome {
    std::fs::write(
        dir.join("ramp.csv"),
        GridFunction::from_fn(256, |x| 2.0 * x).unwrap().to_csv(),
    )
    .unwrap();
    std::fs::write(dir.join("step.csv"), step_sigma().to_csv()).unwrap();
    std::fs::write(dir.join("ramp.json"), dd_ramp(64).to_json()).unwrap();
    let runs: [&[&str]; 7] = [
        &[
            "direct", "--input", "ramp.csv", "--count", "16", "--output", "OUT",
        ],
        &["inverse", "--input", "ramp.json", "--output", "OUT"],
        &["inverse", "--input", "base.json", "--output", "OUT"],
        &["roundtrip", "--input", "step.csv", "--output", "OUT"],
        &[
            "isospectral",
            "--input",
            "ramp.json",
            "--count",
            "10",
            "--output",
            "OUT",
        ],
        &["stability", "--input", "base.json", "--output", "OUT"],
        &["riesz", "--input", "base.json", "--output", "OUT"],
    ];
    let mut mismatches = Vec::new();
    for args in runs {
        let mut outputs = Vec::new();
        for pass in 0..2 {
            let name = format!("det_{}_{pass}.csv", args[0]);
            let argv: Vec<&str> = args
                .iter()
                .map(|a| if *a == "OUT" { name.as_str() } else { a })
                .collect();
            let (code, _, err) = sturm(dir, &argv);
            if code != 0 {
                return check(false, format!("{} exit {code}: {err}", args[0]));
            }
            let mut bytes = std::fs::read(dir.join(&name)).unwrap();
            let report = dir.join(format!("det_{}_{pass}.json", args[0]));
            if report.exists() {
                bytes.extend(std::fs::read(report).unwrap());
            }
            outputs.push(bytes);
        }
        if outputs[0] != outputs[1] {
            mismatches.push(args[0]);
        }
    }
    check(
        mismatches.is_empty(),
        format!(
            "{} commands compared, differing: {mismatches:?}",
            runs.len()
        ),
    )
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let dir: PathBuf = tmp.path().to_path_buf();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 zero-data identity", Box::new(|| criterion_1(&dir))),
        ("2 constant-potential direct", Box::new(criterion_2)),
        ("3 constant-potential inverse", Box::new(criterion_3)),
        ("4 step-potential round trip", Box::new(criterion_4)),
        ("5 positivity gate", Box::new(|| criterion_5(&dir))),
        ("6 factorization residual", Box::new(criterion_6)),
        ("7 isospectral verification", Box::new(criterion_7)),
        ("8 other boundary kinds", Box::new(criterion_8)),
        ("9 stability probe", Box::new(criterion_9)),
        ("10 Riesz diagnostic", Box::new(criterion_10)),
        ("11 determinism", Box::new(|| criterion_11(&dir))),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let outcome = run();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {name:<32} {tag}  {}", outcome.detail);
        if !outcome.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
