//! Direct problem: spectral data of the operator `−(u^{[1]})' − σ u^{[1]} − σ² u`
//! from grid samples of `σ`.
//!
//! The eigenvalue equation is integrated as the first-order system
//!
//! ```text
//! u'       =  σ u + u^{[1]}
//! u^{[1]}' = −(σ² + λ²) u − σ u^{[1]}
//! ```
//!
//! whose matrix is trace-free, so each step is propagated by the exact
//! exponential of a fourth-order Magnus approximation. On a cell where `σ`
//! is constant that exponential is exact, which keeps the free problem free
//! of discretisation error at any frequency.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::spectra::{BoundaryKind, SpectralData};

/// Boundary kind plus the third-type parameter `h` in `u^{[1]}(1) + h u(1) = 0`.
/// `h` is ignored for kinds that are Dirichlet at `x = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharParams {
    pub kind: BoundaryKind,
    pub h: f64,
}

impl CharParams {
    pub fn new(kind: BoundaryKind) -> Self {
        CharParams { kind, h: 0.0 }
    }

    pub fn with_h(kind: BoundaryKind, h: f64) -> Self {
        CharParams { kind, h }
    }
}

impl From<BoundaryKind> for CharParams {
    fn from(kind: BoundaryKind) -> Self {
        CharParams::new(kind)
    }
}

/// Boundary trace at `x = 1` of the kind-normalised solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootResult {
    /// `u(1)`
    pub u1: f64,
    /// `u^{[1]}(1)`
    pub du1: f64,
    /// `∫₀¹ u² dx`
    pub l2norm_sq: f64,
    /// `(u, u^{[1]})` at the nodes of the `σ` grid, when requested.
    pub trajectory: Option<Vec<(f64, f64)>>,
}

/// Relative residual below which a supplied `λ` is accepted as an eigenvalue.
pub const EIGENVALUE_RESIDUAL_TOL: f64 = 1e-6;

const SCAN_STEP: f64 = PI / 16.0;
const SCAN_FLOOR: f64 = 1e-3;
const MAX_SUBDIVISION_DEPTH: u32 = 24;

/// Fixed-step integration settings.
///
/// Each `σ` cell is split into equal sub-steps so that a step never exceeds
/// `2π / (steps_per_period · max(λ, max|σ|, 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Solver {
    pub steps_per_period: usize,
}

impl Default for Solver {
    fn default() -> Self {
        Solver {
            steps_per_period: 64,
        }
    }
}

struct Shot {
    u: f64,
    w: f64,
    norm_sq: f64,
    angle: f64,
    trajectory: Option<Vec<(f64, f64)>>,
}

fn initial_state(kind: BoundaryKind, lambda: f64) -> (f64, f64) {
    if kind.dirichlet_at_zero() {
        (0.0, SQRT_2 * lambda)
    } else {
        (SQRT_2, 0.0)
    }
}

/// `exp(Ω)` for a trace-free 2×2 matrix `[[p, q], [r, −p]]`.
#[inline]
fn expm_traceless(p: f64, q: f64, r: f64) -> [f64; 4] {
    let d = p * p + q * r;
    let (c, s) = if d.abs() < 1e-8 {
        (1.0 + d / 2.0 + d * d / 24.0, 1.0 + d / 6.0 + d * d / 120.0)
    } else if d < 0.0 {
        let w = (-d).sqrt();
        (w.cos(), w.sin() / w)
    } else {
        let w = d.sqrt();
        (w.cosh(), w.sinh() / w)
    };
    [c + s * p, s * q, s * r, c - s * p]
}

impl Solver {
    pub fn new(steps_per_period: usize) -> Self {
        Solver {
            steps_per_period: steps_per_period.max(1),
        }
    }

    fn substeps(&self, sigma: &GridFunction, lambda: f64) -> usize {
        let rate = lambda.abs().max(sigma.max_abs()).max(1.0);
        let target = 2.0 * PI / (self.steps_per_period as f64 * rate);
        (sigma.step() / target).ceil().max(1.0) as usize
    }

    fn integrate(
        &self,
        sigma: &GridFunction,
        lambda: f64,
        kind: BoundaryKind,
        keep_trajectory: bool,
    ) -> Shot {
        const G1: f64 = 0.5 - 0.288_675_134_594_812_9; // 1/2 − √3/6
        const G2: f64 = 0.5 + 0.288_675_134_594_812_9;
        const COMM: f64 = 0.144_337_567_297_406_44; // √3/12

        let values = sigma.values();
        let m = sigma.intervals();
        let n = self.substeps(sigma, lambda);
        let hs = sigma.step() / n as f64;
        let lam2 = lambda * lambda;
        let scale = lambda.abs().max(1.0);

        let (mut u, mut w) = initial_state(kind, lambda);
        let mut trajectory = keep_trajectory.then(|| {
            let mut t = Vec::with_capacity(m + 1);
            t.push((u, w));
            t
        });
        let mut angle = (scale * u).atan2(w);
        let mut prev_angle = angle;
        let mut sum_sq = 0.5 * u * u;
        let d_sq_start = 2.0 * u * (values[0] * u + w);

        for cell in 0..m {
            let sa = values[cell];
            let ds = values[cell + 1] - sa;
            for j in 0..n {
                let s1 = sa + ds * (j as f64 + G1) / n as f64;
                let s2 = sa + ds * (j as f64 + G2) / n as f64;
                let c1 = -s1 * s1 - lam2;
                let c2 = -s2 * s2 - lam2;
                let comm = COMM * hs * hs;
                let p = 0.5 * hs * (s1 + s2) + comm * (c1 - c2);
                let q = 0.5 * hs * 2.0 + comm * 2.0 * (s2 - s1);
                let r = 0.5 * hs * (c1 + c2) + comm * 2.0 * (c2 * s1 - s2 * c1);
                let e = expm_traceless(p, q, r);
                let (nu, nw) = (e[0] * u + e[1] * w, e[2] * u + e[3] * w);
                u = nu;
                w = nw;

                let a = (scale * u).atan2(w);
                let mut delta = a - prev_angle;
                if delta > PI {
                    delta -= 2.0 * PI;
                } else if delta <= -PI {
                    delta += 2.0 * PI;
                }
                angle += delta;
                prev_angle = a;
                sum_sq += u * u;
            }
            if let Some(t) = trajectory.as_mut() {
                t.push((u, w));
            }
        }
        sum_sq -= 0.5 * u * u;
        let d_sq_end = 2.0 * u * (values[m] * u + w);
        // Trapezoid plus the Euler-Maclaurin endpoint term; (u²)' = 2u(σu + u^{[1]}).
        let norm_sq = hs * sum_sq - hs * hs / 12.0 * (d_sq_end - d_sq_start);

        Shot {
            u,
            w,
            norm_sq,
            angle,
            trajectory,
        }
    }

    pub fn shoot(
        &self,
        sigma: &GridFunction,
        lambda: f64,
        kind: BoundaryKind,
        keep_trajectory: bool,
    ) -> Result<ShootResult> {
        check_lambda(lambda)?;
        let shot = self.integrate(sigma, lambda, kind, keep_trajectory);
        Ok(ShootResult {
            u1: shot.u,
            du1: shot.w,
            l2norm_sq: shot.norm_sq,
            trajectory: shot.trajectory,
        })
    }

    pub fn characteristic(
        &self,
        sigma: &GridFunction,
        lambda: f64,
        params: CharParams,
    ) -> Result<f64> {
        check_lambda(lambda)?;
        let shot = self.integrate(sigma, lambda, params.kind, false);
        Ok(residual(&shot, params))
    }

    /// Number of eigenvalues strictly below `lambda²`, from the Prüfer angle
    /// of `(max(λ,1)·u, u^{[1]})` at `x = 1`.
    pub fn count_below(&self, sigma: &GridFunction, lambda: f64, params: CharParams) -> usize {
        let shot = self.integrate(sigma, lambda, params.kind, false);
        prufer_count(&shot, lambda, params)
    }

    fn probe(&self, sigma: &GridFunction, lambda: f64, params: CharParams) -> (f64, usize) {
        let shot = self.integrate(sigma, lambda, params.kind, false);
        (residual(&shot, params), prufer_count(&shot, lambda, params))
    }

    /// The first `count` positive square-root eigenvalues, increasing.
    pub fn eigenvalues(
        &self,
        sigma: &GridFunction,
        count: usize,
        params: CharParams,
    ) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::Argument(
                "eigenvalue count must be at least 1".into(),
            ));
        }
        let kind = params.kind;
        let lo = SCAN_FLOOR;
        let hi = (kind.base(count) + 0.5 * PI).max(lo + SCAN_STEP);
        let cells = ((hi - lo) / SCAN_STEP).ceil() as usize;
        let nodes: Vec<f64> = (0..=cells)
            .map(|j| {
                if j == cells {
                    hi
                } else {
                    lo + j as f64 * SCAN_STEP
                }
            })
            .collect();
        let probes: Vec<(f64, usize)> = nodes
            .par_iter()
            .map(|&l| self.probe(sigma, l, params))
            .collect();

        if probes[0].1 > 0 {
            return Err(Error::NonPositiveOperator {
                below: probes[0].1,
                lambda: lo,
            });
        }
        let found = probes[cells].1;
        if found < count {
            return Err(Error::BracketMismatch {
                found,
                expected: count,
                lo,
                hi,
            });
        }

        let mut brackets = Vec::new();
        for j in 0..cells {
            let (a, b) = (probes[j], probes[j + 1]);
            if b.1 > a.1 && a.1 < count {
                brackets.push(((nodes[j], a), (nodes[j + 1], b)));
            }
        }
        let mut roots: Vec<f64> = brackets
            .par_iter()
            .map(|&(left, right)| self.isolate(sigma, params, left, right, 0))
            .collect::<Result<Vec<Vec<f64>>>>()?
            .into_iter()
            .flatten()
            .collect();
        roots.truncate(count);
        if roots.len() < count {
            return Err(Error::BracketMismatch {
                found: roots.len(),
                expected: count,
                lo,
                hi,
            });
        }
        Ok(roots)
    }

    /// Roots in `(a, b]` given probes at both ends; subdivides until each
    /// piece holds a single eigenvalue.
    fn isolate(
        &self,
        sigma: &GridFunction,
        params: CharParams,
        (a, pa): (f64, (f64, usize)),
        (b, pb): (f64, (f64, usize)),
        depth: u32,
    ) -> Result<Vec<f64>> {
        let inside = pb.1.saturating_sub(pa.1);
        if inside == 0 {
            return Ok(Vec::new());
        }
        if inside == 1 {
            return Ok(vec![self.refine(sigma, params, (a, pa), (b, pb))]);
        }
        if depth >= MAX_SUBDIVISION_DEPTH {
            return Err(Error::BracketMismatch {
                found: 0,
                expected: inside,
                lo: a,
                hi: b,
            });
        }
        const PIECES: usize = 8;
        let mut points = vec![(a, pa)];
        for i in 1..PIECES {
            let l = a + (b - a) * i as f64 / PIECES as f64;
            points.push((l, self.probe(sigma, l, params)));
        }
        points.push((b, pb));
        let mut out = Vec::new();
        for pair in points.windows(2) {
            out.extend(self.isolate(sigma, params, pair[0], pair[1], depth + 1)?);
        }
        Ok(out)
    }

    /// Bisection down to adjacent doubles on a bracket holding one eigenvalue.
    fn refine(
        &self,
        sigma: &GridFunction,
        params: CharParams,
        (mut a, pa): (f64, (f64, usize)),
        (mut b, pb): (f64, (f64, usize)),
    ) -> f64 {
        if pb.0 == 0.0 {
            return b;
        }
        let sign_bracket = pa.0.signum() != pb.0.signum() && pa.0 != 0.0;
        let fa_sign = pa.0.signum();
        let base_count = pa.1;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let left_of_root = if sign_bracket {
                let f = self.characteristic(sigma, mid, params).unwrap_or(0.0);
                if f == 0.0 {
                    return mid;
                }
                f.signum() == fa_sign
            } else {
                self.count_below(sigma, mid, params) <= base_count
            };
            if left_of_root {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    pub fn norming_constants(
        &self,
        sigma: &GridFunction,
        lambdas: &[f64],
        params: CharParams,
    ) -> Result<Vec<f64>> {
        lambdas
            .par_iter()
            .enumerate()
            .map(|(i, &l)| {
                check_lambda(l)?;
                let shot = self.integrate(sigma, l, params.kind, false);
                let rel = relative_residual(&shot, l, params);
                if !(rel <= EIGENVALUE_RESIDUAL_TOL) {
                    return Err(Error::NotAnEigenvalue {
                        index: i + 1,
                        lambda: l,
                        residual: rel,
                    });
                }
                Ok(shot.norm_sq)
            })
            .collect()
    }

    pub fn direct_spectral_data(
        &self,
        sigma: &GridFunction,
        count: usize,
        params: CharParams,
    ) -> Result<SpectralData> {
        let lambda = self
            .eigenvalues(sigma, count, params)
            .map_err(Error::at("eigenvalues"))?;
        let alpha = self
            .norming_constants(sigma, &lambda, params)
            .map_err(Error::at("norming constants"))?;
        let h = params.kind.has_robin_end().then_some(params.h);
        SpectralData::with_h(params.kind, lambda, alpha, h)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "lambda = {lambda} must be finite and >= 0"
        )))
    }
}

fn residual(shot: &Shot, params: CharParams) -> f64 {
    if params.kind.dirichlet_at_one() {
        shot.u
    } else {
        shot.w + params.h * shot.u
    }
}

fn relative_residual(shot: &Shot, lambda: f64, params: CharParams) -> f64 {
    let norm = shot.norm_sq.max(0.0).sqrt();
    let r = residual(shot, params).abs();
    if params.kind.dirichlet_at_one() {
        r / norm
    } else {
        r / (norm * lambda.max(1.0))
    }
}

fn prufer_count(shot: &Shot, lambda: f64, params: CharParams) -> usize {
    let target = if params.kind.dirichlet_at_one() {
        PI
    } else {
        lambda.abs().max(1.0).atan2(-params.h)
    };
    let excess = (shot.angle - target) / PI;
    if excess <= 0.0 {
        0
    } else {
        excess.ceil() as usize
    }
}

pub fn shoot(sigma: &GridFunction, lambda: f64, kind: BoundaryKind) -> Result<ShootResult> {
    Solver::default().shoot(sigma, lambda, kind, true)
}

pub fn characteristic(sigma: &GridFunction, lambda: f64, params: CharParams) -> Result<f64> {
    Solver::default().characteristic(sigma, lambda, params)
}

pub fn eigenvalues(sigma: &GridFunction, count: usize, params: CharParams) -> Result<Vec<f64>> {
    Solver::default().eigenvalues(sigma, count, params)
}

pub fn norming_constants(
    sigma: &GridFunction,
    lambdas: &[f64],
    params: CharParams,
) -> Result<Vec<f64>> {
    Solver::default().norming_constants(sigma, lambdas, params)
}

pub fn direct_spectral_data(
    sigma: &GridFunction,
    count: usize,
    params: CharParams,
) -> Result<SpectralData> {
    Solver::default().direct_spectral_data(sigma, count, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero() -> GridFunction {
        GridFunction::zeros(64).unwrap()
    }

    #[test]
    fn free_dirichlet_shot() {
        let r = shoot(&zero(), PI, BoundaryKind::DD).unwrap();
        assert!(r.u1.abs() < 1e-13);
        assert!((r.du1 + SQRT_2 * PI).abs() < 1e-12);
        assert!((r.l2norm_sq - 1.0).abs() < 1e-12);
        assert_eq!(r.trajectory.unwrap().len(), 65);
    }

    #[test]
    fn free_neumann_dirichlet_shot() {
        let r = shoot(&zero(), PI / 2.0, BoundaryKind::ND).unwrap();
        assert!(r.u1.abs() < 1e-13);
        assert!((r.l2norm_sq - 1.0).abs() < 1e-12);
    }

    #[test]
    fn characteristic_matches_free_sine() {
        let s = zero();
        for i in 1..200 {
            let l = 0.137 * i as f64;
            let c = characteristic(&s, l, BoundaryKind::DD.into()).unwrap();
            assert!((c - SQRT_2 * l.sin()).abs() < 1e-10, "lambda {l}");
        }
        assert!(characteristic(&s, PI / 2.0, BoundaryKind::DD.into()).unwrap() > 0.0);
    }

    #[test]
    fn free_neumann_third_type_zeros() {
        let s = zero();
        let p = CharParams::with_h(BoundaryKind::NT, 0.0);
        for k in 2..6 {
            let c = characteristic(&s, PI * (k as f64 - 1.0), p).unwrap();
            assert!(c.abs() < 1e-10);
        }
    }

    #[test]
    fn prufer_counts_free_dirichlet() {
        let s = zero();
        let solver = Solver::default();
        for (l, n) in [(0.5, 0), (3.0, 0), (3.2, 1), (6.5, 2), (10.0, 3)] {
            assert_eq!(
                solver.count_below(&s, l, BoundaryKind::DD.into()),
                n,
                "lambda {l}"
            );
        }
    }

    #[test]
    fn negative_lambda_is_rejected() {
        assert!(shoot(&zero(), -1.0, BoundaryKind::DD).is_err());
        assert!(characteristic(&zero(), f64::NAN, BoundaryKind::DD.into()).is_err());
    }

    #[test]
    fn non_positive_operator_is_reported() {
        // q = -15 pushes the first Dirichlet eigenvalue to π² − 15 < 0.
        let s = GridFunction::from_fn(64, |x| -15.0 * x).unwrap();
        let err = eigenvalues(&s, 3, BoundaryKind::DD.into()).unwrap_err();
        assert!(
            matches!(err, Error::NonPositiveOperator { below: 1, .. }),
            "{err}"
        );
    }

    #[test]
    fn too_narrow_window_is_a_bracket_mismatch() {
        // q = 60 moves every eigenvalue far above base(k) + π/2 for small k.
        let s = GridFunction::from_fn(64, |x| 60.0 * x).unwrap();
        let err = eigenvalues(&s, 1, BoundaryKind::DD.into()).unwrap_err();
        assert!(matches!(
            err,
            Error::BracketMismatch {
                found: 0,
                expected: 1,
                ..
            }
        ));
    }

    #[test]
    fn non_eigenvalue_is_rejected_with_index() {
        let err = norming_constants(&zero(), &[PI, 2.0 * PI + 1e-3], BoundaryKind::DD.into())
            .unwrap_err();
        assert!(matches!(err, Error::NotAnEigenvalue { index: 2, .. }));
    }
}
