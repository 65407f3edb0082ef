//! Experiments built on the direct and inverse solvers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::direct::{CharParams, Solver};
use crate::error::{Error, Result};
use crate::glm::{reconstruct, ReconstructionResult};
use crate::grid::GridFunction;
use crate::linalg;
use crate::spectra::{validate_spectral_data, BoundaryKind, SpectralData};

/// Draws per `ε` before the probe gives up.
pub const MAX_PROBE_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundTripReport {
    pub kind: BoundaryKind,
    pub count: usize,
    pub grid: usize,
    pub sigma_in: Vec<f64>,
    pub sigma_out: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_in: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_out: Option<f64>,
    /// Mean of `σ_out − σ_in`, removed before measuring the error.
    pub gauge_constant: f64,
    pub l2_error: f64,
    /// `|λ_in − λ_replay|` per index.
    pub spectral_replay_errors: Vec<f64>,
    pub margin: f64,
}

impl RoundTripReport {
    pub fn to_json(&self) -> String {
        crate::io::to_json_string(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityRow {
    pub eps: f64,
    pub data_norm: f64,
    pub sigma_error: f64,
}

/// `eps,data_norm,sigma_error` with a header line.
pub fn stability_csv(rows: &[StabilityRow]) -> String {
    let mut out = String::from("eps,data_norm,sigma_error\n");
    for r in rows {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            r.eps, r.data_norm, r.sigma_error
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RieszBasis {
    Sine,
    Cosine,
}

impl RieszBasis {
    /// The family whose unperturbed members are the eigenfunctions of `kind`.
    pub fn for_kind(kind: BoundaryKind) -> Self {
        if kind.dirichlet_at_zero() {
            RieszBasis::Sine
        } else {
            RieszBasis::Cosine
        }
    }
}

/// Mean of `a − b` and the L₂ norm of what is left, both with trapezoid
/// weights. The grids must match.
pub fn gauge_removed_distance(a: &GridFunction, b: &GridFunction) -> Result<(f64, f64)> {
    if a.intervals() != b.intervals() {
        return Err(Error::Grid(format!(
            "grids differ: M = {} vs M = {}",
            a.intervals(),
            b.intervals()
        )));
    }
    let w = GridFunction::trapezoid_weights(a.intervals());
    let diff: Vec<f64> = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x - y)
        .collect();
    let mean: f64 = w.iter().zip(&diff).map(|(w, d)| w * d).sum();
    let sq: f64 = w
        .iter()
        .zip(&diff)
        .map(|(w, d)| w * (d - mean) * (d - mean))
        .sum();
    Ok((mean, sq.sqrt()))
}

/// Direct problem, reconstruction at `m` intervals, and a replay of the
/// spectrum of the reconstructed `σ`.
pub fn roundtrip_report(
    sigma: &GridFunction,
    count: usize,
    params: CharParams,
    m: usize,
) -> Result<RoundTripReport> {
    let solver = Solver::default();
    let data = solver
        .direct_spectral_data(sigma, count, params)
        .map_err(Error::at("direct"))?;
    let result = reconstruct(&data, m).map_err(Error::at("reconstruct"))?;
    let sigma_in = sigma.resample(m)?;
    let sigma_out = result.sigma();
    let (gauge_constant, l2_error) = gauge_removed_distance(&sigma_out, &sigma_in)?;

    let replay_params = CharParams::with_h(params.kind, result.h.unwrap_or(0.0));
    let replay = solver
        .eigenvalues(&sigma_out, count, replay_params)
        .map_err(Error::at("replay"))?;
    let spectral_replay_errors = data
        .lambda()
        .iter()
        .zip(&replay)
        .map(|(a, b)| (a - b).abs())
        .collect();

    Ok(RoundTripReport {
        kind: params.kind,
        count,
        grid: m,
        sigma_in: sigma_in.into_values(),
        sigma_out: sigma_out.into_values(),
        h_in: data.h(),
        h_out: result.h,
        gauge_constant,
        l2_error,
        spectral_replay_errors,
        margin: result.positivity_margin,
    })
}

/// The member of the isospectral set with norming constants `α_k = 1 + β_k`.
pub fn isospectral_member(
    lambdas: &[f64],
    beta: &[f64],
    kind: BoundaryKind,
    m: usize,
) -> Result<ReconstructionResult> {
    let alpha = beta.iter().map(|b| 1.0 + b).collect();
    let data = SpectralData::new(kind, lambdas.to_vec(), alpha)?;
    reconstruct(&data, m)
}

fn perturb(data: &SpectralData, direction: &[f64], eps: f64) -> Result<SpectralData> {
    let k = data.len();
    let lambda = data
        .lambda()
        .iter()
        .zip(&direction[..k])
        .map(|(l, d)| l + eps * d)
        .collect();
    let alpha = data
        .alpha()
        .iter()
        .zip(&direction[k..])
        .map(|(a, d)| a + eps * d)
        .collect();
    let out = SpectralData::with_h(data.kind(), lambda, alpha, data.h())?;
    let report = validate_spectral_data(&out);
    if report.ok {
        Ok(out)
    } else {
        Err(Error::Invalid(report))
    }
}

/// For each `ε`, moves `(μ, β)` by a random direction of ℓ₂ length `ε` and
/// measures how far the reconstructed `σ` moves. Every `ε` restarts the
/// generator from `seed`, so all rows probe the same direction unless a
/// draw is rejected.
pub fn stability_probe(
    data: &SpectralData,
    eps_list: &[f64],
    m: usize,
    seed: u64,
) -> Result<Vec<StabilityRow>> {
    if let Some(e) = eps_list.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(Error::Argument(format!(
            "eps = {e} must be finite and >= 0"
        )));
    }
    let baseline = reconstruct(data, m).map_err(Error::at("baseline reconstruction"))?;
    let sigma0 = baseline.sigma();
    let dim = 2 * data.len();

    eps_list
        .par_iter()
        .map(|&eps| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut last_error = None;
            for _ in 0..MAX_PROBE_ATTEMPTS {
                let mut dir: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                dir.iter_mut().for_each(|v| *v /= norm);
                let attempt = perturb(data, &dir, eps).and_then(|d| reconstruct(&d, m));
                match attempt {
                    Ok(result) => {
                        let (_, sigma_error) = gauge_removed_distance(&result.sigma(), &sigma0)?;
                        let data_norm = eps * dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                        return Ok(StabilityRow {
                            eps,
                            data_norm,
                            sigma_error,
                        });
                    }
                    Err(e) => last_error = Some(e),
                }
            }
            Err(Error::ProbeRejected {
                eps,
                attempts: MAX_PROBE_ATTEMPTS,
                last: Box::new(last_error.expect("at least one attempt")),
            })
        })
        .collect()
}

/// `sin(x)/x` with the removable singularity filled in.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Gram matrix of `√2 sin(λ_k x)` or `√2 cos(λ_k x)` in `L₂(0, 1)`, entries
/// integrated in closed form.
pub fn riesz_gram(lambdas: &[f64], basis: RieszBasis) -> Vec<Vec<f64>> {
    let sign = match basis {
        RieszBasis::Sine => -1.0,
        RieszBasis::Cosine => 1.0,
    };
    lambdas
        .iter()
        .map(|&a| {
            lambdas
                .iter()
                .map(|&b| sinc(a - b) + sign * sinc(a + b))
                .collect()
        })
        .collect()
}

/// Ratio of the extreme eigenvalues of the Gram matrix; infinite when the
/// system is numerically dependent.
pub fn riesz_condition(lambdas: &[f64], basis: RieszBasis) -> f64 {
    let k = lambdas.len();
    if k == 0 {
        return 1.0;
    }
    let gram = riesz_gram(lambdas, basis);
    let matrix = nalgebra::DMatrix::from_fn(k, k, |i, j| gram[i][j]);
    let (lo, hi) = linalg::eigen_range(matrix);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauge_removal_absorbs_constants() {
        let a = GridFunction::from_fn(32, |x| x * x).unwrap();
        let b = GridFunction::from_fn(32, |x| x * x + 3.0).unwrap();
        let (c, e) = gauge_removed_distance(&b, &a).unwrap();
        assert!((c - 3.0).abs() < 1e-14 && e < 1e-14);
        let z = GridFunction::zeros(64).unwrap();
        assert!(gauge_removed_distance(&a, &z).is_err());
    }

    #[test]
    fn orthonormal_systems() {
        let sine: Vec<f64> = (1..=20).map(|k| PI * k as f64).collect();
        let cosine: Vec<f64> = (1..=20).map(|k| PI * (k as f64 - 0.5)).collect();
        assert!((riesz_condition(&sine, RieszBasis::Sine) - 1.0).abs() < 1e-10);
        assert!((riesz_condition(&cosine, RieszBasis::Cosine) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gram_matches_quadrature() {
        let l = [2.0, 3.3, 7.1];
        for basis in [RieszBasis::Sine, RieszBasis::Cosine] {
            let g = riesz_gram(&l, basis);
            let n = 20_000;
            for i in 0..3 {
                for j in 0..3 {
                    let f = |x: f64| match basis {
                        RieszBasis::Sine => 2.0 * (l[i] * x).sin() * (l[j] * x).sin(),
                        RieszBasis::Cosine => 2.0 * (l[i] * x).cos() * (l[j] * x).cos(),
                    };
                    // Simpson
                    let h = 1.0 / n as f64;
                    let mut s = f(0.0) + f(1.0);
                    for m in 1..n {
                        s += if m % 2 == 1 { 4.0 } else { 2.0 } * f(m as f64 * h);
                    }
                    assert!((g[i][j] - s * h / 3.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn near_duplicate_frequency_is_ill_conditioned() {
        let mut l: Vec<f64> = (1..=10).map(|k| PI * k as f64).collect();
        l[1] = l[0] + 1e-3;
        assert!(riesz_condition(&l, RieszBasis::Sine) > 1e3);
    }

    #[test]
    fn stability_csv_shape() {
        let rows = [StabilityRow {
            eps: 0.5,
            data_norm: 0.5,
            sigma_error: 0.25,
        }];
        assert_eq!(
            stability_csv(&rows),
            "eps,data_norm,sigma_error\n5.0000000000000000e-1,5.0000000000000000e-1,2.5000000000000000e-1\n"
        );
    }

    #[test]
    fn negative_eps_is_rejected() {
        let data = SpectralData::base(BoundaryKind::DD, 4).unwrap();
        assert!(stability_probe(&data, &[-1.0], 32, 0).is_err());
    }
}
