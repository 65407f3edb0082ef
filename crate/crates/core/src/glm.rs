//! Inverse problem: spectral data → `φ` → kernel `f` → triangular kernel
//! `k` → `σ` (and `h`).
//!
//! Everything lives on the grid `x_i = i/M`. `φ` is tabulated on `[0, 2]`
//! with the same step, so `f(x_i, y_j)` only ever reads `φ` at nodes.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::direct::Solver;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, MIN_INTERVALS};
use crate::linalg;
use crate::spectra::{validate_spectral_data, BoundaryKind, SpectralData};

/// `φ` at `s_m = m/M`, `m = 0..=2M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PhiTable {
    values: Vec<f64>,
}

impl PhiTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 * MIN_INTERVALS + 1 || values.len() % 2 == 0 {
            return Err(Error::Grid(format!(
                "phi table needs 2M+1 values with M >= {MIN_INTERVALS}, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Grid(format!("phi value at node {i} is not finite")));
        }
        Ok(PhiTable { values })
    }

    pub fn intervals(&self) -> usize {
        (self.values.len() - 1) / 2
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// The kernel `f(x, y) = φ(x+y) ∓ φ(x−y)`, `−` for `DD`/`DN`, `+` for `NT`/`ND`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelF {
    phi: PhiTable,
    kind: BoundaryKind,
}

impl KernelF {
    pub fn phi(&self) -> &PhiTable {
        &self.phi
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn intervals(&self) -> usize {
        self.phi.intervals()
    }

    /// `f(x_i, y_j)` for `0 <= i, j <= M`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        let v = &self.phi.values;
        let (plus, minus) = (v[i + j], v[i.abs_diff(j)]);
        if self.kind.dirichlet_at_zero() {
            plus - minus
        } else {
            plus + minus
        }
    }
}

/// Lower-triangular samples `k(x_i, y_j)`, `j <= i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularKernel {
    rows: Vec<Vec<f64>>,
}

impl TriangularKernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < MIN_INTERVALS + 1 {
            return Err(Error::Grid(format!(
                "kernel needs at least {} rows",
                MIN_INTERVALS + 1
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(Error::Grid(format!(
                    "kernel row {i} has {} entries",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Grid(format!("kernel row {i} is not finite")));
            }
        }
        Ok(TriangularKernel { rows })
    }

    pub fn intervals(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.rows
    }

    /// `i,j,k` triples, one per stored entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,k\n");
        for (i, row) in self.rows.iter().enumerate() {
            for (j, k) in row.iter().enumerate() {
                out.push_str(&format!("{i},{j},{k:.16e}\n"));
            }
        }
        out
    }

    /// `‖K‖` as the L₂ norm of the kernel over the triangle, with the same
    /// trapezoid weights the solver uses.
    pub fn hs_norm(&self) -> f64 {
        let m = self.intervals();
        let outer = GridFunction::trapezoid_weights(m);
        let step = 1.0 / m as f64;
        let total: f64 = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let inner: f64 = row
                    .iter()
                    .enumerate()
                    .map(|(j, k)| partial_weight(i, j, step) * k * k)
                    .sum();
                outer[i] * inner
            })
            .sum();
        total.sqrt()
    }
}

/// Trapezoid weight of node `j` for integration over `[0, x_i]`.
#[inline]
fn partial_weight(i: usize, j: usize, step: f64) -> f64 {
    if i == 0 {
        0.0
    } else if j == 0 || j == i {
        0.5 * step
    } else {
        step
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionResult {
    pub kind: BoundaryKind,
    pub grid: usize,
    pub count: usize,
    pub sigma: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub positivity_margin: f64,
    pub kernel_hs_norm: f64,
    pub factorization_residual: f64,
    pub phi: PhiTable,
    #[serde(skip)]
    pub kernel: TriangularKernel,
}

impl ReconstructionResult {
    pub fn sigma(&self) -> GridFunction {
        GridFunction::new(self.sigma.clone()).expect("reconstructed sigma is a valid grid function")
    }

    pub fn to_json(&self) -> String {
        crate::io::to_json_string(self)
    }
}

fn check_intervals(m: usize) -> Result<()> {
    if m < MIN_INTERVALS {
        return Err(Error::Grid(format!(
            "M = {m} is below the minimum {MIN_INTERVALS}"
        )));
    }
    Ok(())
}

/// `φ(s) = Σ_k [cos(base_k s) − cos(λ_k s)/α_k]` for `DD`/`DN` and
/// `φ(s) = Σ_k [cos(λ_k s)/α_k − cos(base_k s)/α⁰_k]` for `NT`/`ND`, where
/// `α⁰_k` is the norm of the unperturbed eigenfunction. `α⁰_1 = 2` for the
/// constant mode of `NT`, one everywhere else.
pub fn assemble_phi(data: &SpectralData, m: usize) -> Result<PhiTable> {
    check_intervals(m)?;
    let report = validate_spectral_data(data);
    if !report.ok {
        return Err(Error::Invalid(report));
    }
    let kind = data.kind();
    let sine = kind.dirichlet_at_zero();
    // (base_k, 1/α⁰_k, λ_k, 1/α_k)
    let modes: Vec<(f64, f64, f64, f64)> = data
        .lambda()
        .iter()
        .zip(data.alpha())
        .enumerate()
        .map(|(i, (&l, &a))| (kind.base(i + 1), 1.0 / kind.base_norm_sq(i + 1), l, 1.0 / a))
        .collect();
    let values = (0..=2 * m)
        .into_par_iter()
        .map(|node| {
            let s = node as f64 / m as f64;
            modes
                .iter()
                .map(|&(base, inv_base_norm, l, inv_a)| {
                    if sine {
                        (base * s).cos() - inv_a * (l * s).cos()
                    } else {
                        inv_a * (l * s).cos() - inv_base_norm * (base * s).cos()
                    }
                })
                .sum()
        })
        .collect();
    PhiTable::new(values)
}

pub fn kernel_f(phi: &PhiTable, kind: BoundaryKind) -> KernelF {
    KernelF {
        phi: phi.clone(),
        kind,
    }
}

/// `I + W^{1/2} F W^{1/2}` with full trapezoid weights on `[0, 1]`.
fn weighted_operator(f: &KernelF) -> DMatrix<f64> {
    let m = f.intervals();
    let sw: Vec<f64> = GridFunction::trapezoid_weights(m)
        .into_iter()
        .map(f64::sqrt)
        .collect();
    DMatrix::from_fn(m + 1, m + 1, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta + sw[i] * f.at(i, j) * sw[j]
    })
}

/// Smallest eigenvalue of the discretised `I + F`. Returned even when it is
/// not positive.
pub fn positivity_margin(f: &KernelF) -> f64 {
    linalg::min_eigenvalue(weighted_operator(f))
}

/// Row `i` of the discretised equation
/// `k(x_i, y_j) + f(x_i, y_j) + Σ_s w_s k(x_i, y_s) f(y_s, y_j) = 0`, `j <= i`,
/// solved in the symmetric variables `z_s = √w_s k(x_i, y_s)`.
fn solve_row(f: &KernelF, i: usize) -> Result<Vec<f64>> {
    if i == 0 {
        return Ok(vec![-f.at(0, 0)]);
    }
    let step = 1.0 / f.intervals() as f64;
    let sw: Vec<f64> = (0..=i).map(|j| partial_weight(i, j, step).sqrt()).collect();
    let a = DMatrix::from_fn(i + 1, i + 1, |r, c| {
        let delta = if r == c { 1.0 } else { 0.0 };
        delta + sw[r] * f.at(r, c) * sw[c]
    });
    let b = DVector::from_fn(i + 1, |r, _| -sw[r] * f.at(i, r));
    let z = linalg::solve_symmetric(a, b).ok_or(Error::SingularRow { row: i })?;
    Ok(z.iter().zip(&sw).map(|(z, s)| z / s).collect())
}

fn solve_rows(f: &KernelF) -> Result<TriangularKernel> {
    let rows = (0..=f.intervals())
        .into_par_iter()
        .map(|i| solve_row(f, i))
        .collect::<Result<Vec<_>>>()?;
    TriangularKernel::new(rows).map_err(|_| Error::SingularRow { row: 0 })
}

/// Solves the discretised GLM equation row by row. Refuses when the
/// discretised `I + F` is not positive definite.
pub fn solve_glm(f: &KernelF) -> Result<TriangularKernel> {
    let margin = positivity_margin(f);
    if !(margin > 0.0) {
        return Err(Error::NotPositive { margin });
    }
    solve_rows(f)
}

/// `σ(x_i) = −2φ(2x_i) − 2 Σ_s w_s k(x_i, y_s) f(y_s, x_i)`.
pub fn recover_sigma(kernel: &TriangularKernel, f: &KernelF) -> Result<GridFunction> {
    let m = kernel.intervals();
    if f.intervals() != m {
        return Err(Error::Grid(format!(
            "kernel has M = {m} but f has M = {}",
            f.intervals()
        )));
    }
    let step = 1.0 / m as f64;
    let phi = f.phi().values();
    let values = (0..=m)
        .map(|i| {
            let integral: f64 = kernel
                .row(i)
                .iter()
                .enumerate()
                .map(|(s, k)| partial_weight(i, s, step) * k * f.at(s, i))
                .sum();
            -2.0 * phi[2 * i] - 2.0 * integral
        })
        .collect();
    GridFunction::new(values)
}

/// `h` such that `u^{[1]}(1) + h u(1) = 0` for the solution at `λ₁`.
pub fn recover_h(sigma: &GridFunction, lambda1: f64, kind: BoundaryKind) -> Result<f64> {
    if !kind.has_robin_end() {
        return Err(Error::Argument(format!(
            "kind {kind} has no third-type end"
        )));
    }
    let shot = Solver::default().shoot(sigma, lambda1, kind, false)?;
    let norm = shot.l2norm_sq.max(0.0).sqrt();
    let ratio = shot.u1.abs() / norm;
    if !(ratio >= 1e-12) {
        return Err(Error::DirichletAtOne { ratio });
    }
    Ok(-shot.du1 / shot.u1)
}

/// `q = 2 d/dx k(x, x)` by finite differences; only meaningful for smooth data.
pub fn smooth_q_diagnostic(kernel: &TriangularKernel) -> GridFunction {
    let m = kernel.intervals();
    let d: Vec<f64> = (0..=m).map(|i| kernel.row(i)[i]).collect();
    let inv = m as f64;
    let q = (0..=m)
        .map(|i| {
            let slope = if i == 0 {
                (-3.0 * d[0] + 4.0 * d[1] - d[2]) * 0.5 * inv
            } else if i == m {
                (3.0 * d[m] - 4.0 * d[m - 1] + d[m - 2]) * 0.5 * inv
            } else {
                (d[i + 1] - d[i - 1]) * 0.5 * inv
            };
            2.0 * slope
        })
        .collect();
    GridFunction::new(q).expect("kernel has at least 17 rows")
}

/// Largest row residual of the discretised GLM equation.
pub fn glm_residual(kernel: &TriangularKernel, f: &KernelF) -> f64 {
    let step = 1.0 / kernel.intervals() as f64;
    kernel
        .rows()
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            (0..=i)
                .map(|j| {
                    let integral: f64 = row
                        .iter()
                        .enumerate()
                        .map(|(s, k)| partial_weight(i, s, step) * k * f.at(s, j))
                        .sum();
                    (row[j] + f.at(i, j) + integral).abs()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// `max |(I + L) U (I + L)ᵀ − I|` with `U = I + W^{1/2} F W^{1/2}` and `L` the
/// triangular integral operator in the same weighted coordinates.
pub fn factorization_residual(kernel: &TriangularKernel, f: &KernelF) -> f64 {
    let m = kernel.intervals();
    let step = 1.0 / m as f64;
    let w = GridFunction::trapezoid_weights(m);
    let mut t = DMatrix::<f64>::identity(m + 1, m + 1);
    for (i, row) in kernel.rows().iter().enumerate() {
        for (j, k) in row.iter().enumerate() {
            t[(i, j)] += (w[i] / w[j]).sqrt() * partial_weight(i, j, step) * k;
        }
    }
    let product = &t * weighted_operator(f) * t.transpose();
    let identity = DMatrix::<f64>::identity(m + 1, m + 1);
    (product - identity).amax()
}

/// The full inverse pipeline at `M` intervals.
pub fn reconstruct(data: &SpectralData, m: usize) -> Result<ReconstructionResult> {
    let phi = assemble_phi(data, m).map_err(Error::at("assemble phi"))?;
    let f = kernel_f(&phi, data.kind());
    let margin = positivity_margin(&f);
    if !(margin > 0.0) {
        return Err(Error::at("positivity check")(Error::NotPositive { margin }));
    }
    let kernel = solve_rows(&f).map_err(Error::at("solve GLM"))?;
    let sigma = recover_sigma(&kernel, &f).map_err(Error::at("recover sigma"))?;
    let h = if data.kind().has_robin_end() {
        Some(recover_h(&sigma, data.lambda()[0], data.kind()).map_err(Error::at("recover h"))?)
    } else {
        None
    };
    Ok(ReconstructionResult {
        kind: data.kind(),
        grid: m,
        count: data.len(),
        sigma: sigma.into_values(),
        h,
        positivity_margin: margin,
        kernel_hs_norm: kernel.hs_norm(),
        factorization_residual: factorization_residual(&kernel, &f),
        phi,
        kernel,
    })
}
