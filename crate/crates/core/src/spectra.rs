//! Spectral data: eigenvalue square roots `λ_k` and norming constants `α_k`
//! for one of four boundary-condition combinations.
//!
//! Only finitely many pairs are ever stored. Every index past the stored
//! range is treated as sitting exactly on its base value, `λ_k = base(k)`
//! and `α_k = 1`, so the remainders `μ_k = λ_k − base(k)` and
//! `β_k = α_k − 1` vanish there.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which endpoint conditions define the operator.
///
/// The first letter names the condition at `x = 0`, the second the one at
/// `x = 1`: `D` Dirichlet, `N` Neumann type `u^{[1]}(0) = 0`, `T` third type
/// `u^{[1]}(1) + h u(1) = 0`. `DN` is Dirichlet at 0 and third type at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryKind {
    DD,
    NT,
    ND,
    DN,
}

impl BoundaryKind {
    pub const ALL: [BoundaryKind; 4] = [
        BoundaryKind::DD,
        BoundaryKind::NT,
        BoundaryKind::ND,
        BoundaryKind::DN,
    ];

    /// Unperturbed frequency of the `k`-th eigenvalue, `k` counted from 1.
    pub fn base(self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match self {
            BoundaryKind::DD => PI * k as f64,
            BoundaryKind::NT => PI * (k as f64 - 1.0),
            BoundaryKind::ND | BoundaryKind::DN => PI * (k as f64 - 0.5),
        }
    }

    /// Dirichlet condition at `x = 0`; eigenfunctions start like `sin`.
    pub fn dirichlet_at_zero(self) -> bool {
        matches!(self, BoundaryKind::DD | BoundaryKind::DN)
    }

    /// Dirichlet condition at `x = 1`.
    pub fn dirichlet_at_one(self) -> bool {
        matches!(self, BoundaryKind::DD | BoundaryKind::ND)
    }

    /// Third-type condition at `x = 1`, carrying a parameter `h`.
    pub fn has_robin_end(self) -> bool {
        !self.dirichlet_at_one()
    }

    /// Squared norm of the unperturbed `k`-th basis function `√2 cos(base·x)`
    /// or `√2 sin(base·x)`. Only the constant mode of `NT` differs from one.
    pub(crate) fn base_norm_sq(self, k: usize) -> f64 {
        if self == BoundaryKind::NT && k == 1 {
            2.0
        } else {
            1.0
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryKind::DD => "DD",
            BoundaryKind::NT => "NT",
            BoundaryKind::ND => "ND",
            BoundaryKind::DN => "DN",
        }
    }
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "DD" => Ok(BoundaryKind::DD),
            "NT" => Ok(BoundaryKind::NT),
            "ND" => Ok(BoundaryKind::ND),
            "DN" => Ok(BoundaryKind::DN),
            other => Err(Error::Argument(format!(
                "unknown boundary kind {other:?}, expected DD|NT|ND|DN"
            ))),
        }
    }
}

/// Eigenvalue square roots and norming constants for one boundary kind.
///
/// Construction only checks structure (non-empty, equal lengths, finite
/// numbers). Admissibility is checked separately by [`validate_spectral_data`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralData {
    kind: BoundaryKind,
    lambda: Vec<f64>,
    alpha: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectralData {
    kind: BoundaryKind,
    lambda: Vec<f64>,
    alpha: Vec<f64>,
    #[serde(default)]
    h: Option<f64>,
}

impl SpectralData {
    pub fn new(kind: BoundaryKind, lambda: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        Self::with_h(kind, lambda, alpha, None)
    }

    pub fn with_h(
        kind: BoundaryKind,
        lambda: Vec<f64>,
        alpha: Vec<f64>,
        h: Option<f64>,
    ) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::Structural("lambda list is empty".into()));
        }
        if lambda.len() != alpha.len() {
            return Err(Error::Structural(format!(
                "lambda has {} entries but alpha has {}",
                lambda.len(),
                alpha.len()
            )));
        }
        if let Some(i) = lambda.iter().position(|v| !v.is_finite()) {
            return Err(Error::Structural(format!(
                "lambda[{}] is not finite",
                i + 1
            )));
        }
        if let Some(i) = alpha.iter().position(|v| !v.is_finite()) {
            return Err(Error::Structural(format!("alpha[{}] is not finite", i + 1)));
        }
        if matches!(h, Some(v) if !v.is_finite()) {
            return Err(Error::Structural("h is not finite".into()));
        }
        Ok(SpectralData {
            kind,
            lambda,
            alpha,
            h,
        })
    }

    /// Unperturbed data `λ_k = base(k)`, `α_k = 1` with `count` entries.
    ///
    /// For `NT` the first frequency is zero, so this is not admissible data
    /// for that kind; it is still useful as a reference point.
    pub fn base(kind: BoundaryKind, count: usize) -> Result<Self> {
        let lambda = (1..=count).map(|k| kind.base(k)).collect();
        Self::new(kind, lambda, vec![1.0; count])
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn h(&self) -> Option<f64> {
        self.h
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn set_h(&mut self, h: Option<f64>) {
        self.h = h;
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSpectralData =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::with_h(raw.kind, raw.lambda, raw.alpha, raw.h)
    }

    pub fn to_json(&self) -> String {
        crate::io::to_json_string(self)
    }
}

/// One violated admissibility clause. Indices count from 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum Violation {
    NonPositiveLambda {
        index: usize,
        value: f64,
    },
    NonMonotoneLambda {
        index: usize,
        value: f64,
        previous: f64,
    },
    /// The last stored frequency is not below the first implied base
    /// frequency, so the full sequence would not increase.
    TailOverlap {
        index: usize,
        value: f64,
        next_base: f64,
    },
    NonPositiveAlpha {
        index: usize,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::NonPositiveLambda { index, value } => {
                write!(f, "(A1) lambda not positive at index {index} ({value})")
            }
            Violation::NonMonotoneLambda {
                index,
                value,
                previous,
            } => write!(
                f,
                "(A1) lambda non-monotone at index {index} ({value} after {previous})"
            ),
            Violation::TailOverlap {
                index,
                value,
                next_base,
            } => write!(
                f,
                "(A1) lambda[{index}] = {value} is not below the next base frequency {next_base}"
            ),
            Violation::NonPositiveAlpha { index, value } => {
                write!(f, "(A2) alpha not positive at index {index} ({value})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub ell2_mu: f64,
    pub ell2_beta: f64,
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        crate::io::to_json_string(self)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn ell2(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn validate_spectral_data(data: &SpectralData) -> ValidationReport {
    let kind = data.kind();
    let mut violations = Vec::new();
    for (i, &l) in data.lambda().iter().enumerate() {
        if l <= 0.0 {
            violations.push(Violation::NonPositiveLambda {
                index: i + 1,
                value: l,
            });
        }
        if i > 0 && l <= data.lambda()[i - 1] {
            violations.push(Violation::NonMonotoneLambda {
                index: i + 1,
                value: l,
                previous: data.lambda()[i - 1],
            });
        }
    }
    let count = data.len();
    let last = data.lambda()[count - 1];
    let next_base = kind.base(count + 1);
    if last >= next_base {
        violations.push(Violation::TailOverlap {
            index: count,
            value: last,
            next_base,
        });
    }
    for (i, &a) in data.alpha().iter().enumerate() {
        if a <= 0.0 {
            violations.push(Violation::NonPositiveAlpha {
                index: i + 1,
                value: a,
            });
        }
    }
    let (mu, beta) = remainders(data);
    ValidationReport {
        ok: violations.is_empty(),
        violations,
        ell2_mu: ell2(&mu),
        ell2_beta: ell2(&beta),
    }
}

/// `μ_k = λ_k − base(k)` and `β_k = α_k − 1`.
pub fn remainders(data: &SpectralData) -> (Vec<f64>, Vec<f64>) {
    let kind = data.kind();
    let mu = data
        .lambda()
        .iter()
        .enumerate()
        .map(|(i, &l)| l - kind.base(i + 1))
        .collect();
    let beta = data.alpha().iter().map(|&a| a - 1.0).collect();
    (mu, beta)
}

/// Inverse of [`remainders`]; rejects data that fails validation.
pub fn synthesize_data(kind: BoundaryKind, mu: &[f64], beta: &[f64]) -> Result<SpectralData> {
    if mu.len() != beta.len() {
        return Err(Error::Structural(format!(
            "mu has {} entries but beta has {}",
            mu.len(),
            beta.len()
        )));
    }
    let lambda = mu
        .iter()
        .enumerate()
        .map(|(i, &m)| kind.base(i + 1) + m)
        .collect();
    let alpha = beta.iter().map(|&b| 1.0 + b).collect();
    let data = SpectralData::new(kind, lambda, alpha)?;
    let report = validate_spectral_data(&data);
    if !report.ok {
        return Err(Error::Invalid(report));
    }
    Ok(data)
}

/// Data of the operator whose potential is shifted by the constant `c`,
/// i.e. `σ(x) ↦ σ(x) + c·x`.
///
/// Eigenvalues move to `λ_k² + c`. With the `u^{[1]}(0) = √2 λ_k`
/// normalisation (`DD`, `DN`) the norming constants scale by
/// `(λ_k² + c)/λ_k²`; with `u(0) = √2` (`NT`, `ND`) they are unchanged.
/// An attached `h` moves to `h + c`, since `σ(1)` grows by `c`.
pub fn shift_spectrum(data: &SpectralData, c: f64) -> Result<SpectralData> {
    if !c.is_finite() {
        return Err(Error::Argument(format!("shift {c} is not finite")));
    }
    if let Some((i, l)) = data
        .lambda()
        .iter()
        .enumerate()
        .find(|(_, &l)| l * l + c <= 0.0)
    {
        return Err(Error::Argument(format!(
            "shift {c} makes lambda[{}]^2 + c = {} non-positive",
            i + 1,
            l * l + c
        )));
    }
    let kind = data.kind();
    let lambda: Vec<f64> = data.lambda().iter().map(|&l| (l * l + c).sqrt()).collect();
    let alpha = if kind.dirichlet_at_zero() {
        data.alpha()
            .iter()
            .zip(data.lambda())
            .map(|(&a, &l)| a * (l * l + c) / (l * l))
            .collect()
    } else {
        data.alpha().to_vec()
    };
    let h = data.h().map(|h| h + c);
    SpectralData::with_h(kind, lambda, alpha, h)
}
