//! Real functions sampled on the uniform grid `x_i = i/M`, `i = 0..=M`.

use crate::error::{Error, Result};

pub const MIN_INTERVALS: usize = 16;

/// Values on `x_i = i/M`. Between nodes the function is read as the
/// piecewise-linear interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_INTERVALS + 1 {
            return Err(Error::Grid(format!(
                "need at least {} nodes (M >= {MIN_INTERVALS}), got {}",
                MIN_INTERVALS + 1,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Grid(format!("value at node {i} is not finite")));
        }
        Ok(GridFunction { values })
    }

    pub fn from_fn(intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let m = intervals as f64;
        Self::new((0..=intervals).map(|i| f(i as f64 / m)).collect())
    }

    pub fn zeros(intervals: usize) -> Result<Self> {
        Self::new(vec![0.0; intervals + 1])
    }

    /// Number of intervals `M`.
    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        1.0 / self.intervals() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.intervals() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Piecewise-linear interpolant at `x`, clamped to `[0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let m = self.intervals();
        let t = (x.clamp(0.0, 1.0)) * m as f64;
        let cell = (t.floor() as usize).min(m - 1);
        let frac = t - cell as f64;
        let (a, b) = (self.values[cell], self.values[cell + 1]);
        a + frac * (b - a)
    }

    /// Samples the interpolant on a grid with `intervals` cells.
    pub fn resample(&self, intervals: usize) -> Result<Self> {
        if intervals == self.intervals() {
            return Ok(self.clone());
        }
        Self::from_fn(intervals, |x| self.eval(x))
    }

    /// `σ(x) + c·x`, the primitive of the potential shifted by `c`.
    pub fn add_linear(&self, c: f64) -> Result<Self> {
        let m = self.intervals() as f64;
        Self::new(
            self.values
                .iter()
                .enumerate()
                .map(|(i, v)| v + c * i as f64 / m)
                .collect(),
        )
    }

    /// Composite trapezoid weights on `[0, 1]`.
    pub fn trapezoid_weights(intervals: usize) -> Vec<f64> {
        let h = 1.0 / intervals as f64;
        let mut w = vec![h; intervals + 1];
        w[0] = 0.5 * h;
        w[intervals] = 0.5 * h;
        w
    }

    /// Trapezoid integral of the function over `[0, 1]`.
    pub fn integral(&self) -> f64 {
        Self::trapezoid_weights(self.intervals())
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v)
            .sum()
    }

    /// Parses the `x,sigma` CSV format. The `x` column must match `i/M`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Parse(e.to_string()))?
            .clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "sigma" {
            return Err(Error::Parse(format!(
                "expected header `x,sigma`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            if record.len() != 2 {
                return Err(Error::Parse(format!(
                    "row {} has {} fields",
                    row + 1,
                    record.len()
                )));
            }
            let parse = |field: &str| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: not a number: {field:?}", row + 1)))
            };
            xs.push(parse(&record[0])?);
            values.push(parse(&record[1])?);
        }
        if xs.len() < 2 {
            return Err(Error::Grid(format!("only {} rows", xs.len())));
        }
        let m = (xs.len() - 1) as f64;
        for (i, &x) in xs.iter().enumerate() {
            if !((x - i as f64 / m).abs() <= 1e-9) {
                return Err(Error::Grid(format!(
                    "row {}: x = {x} but a uniform grid on [0,1] needs {}",
                    i + 1,
                    i as f64 / m
                )));
            }
        }
        Self::new(values)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * self.values.len() + 8);
        out.push_str("x,sigma\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{:.14e},{:.14e}\n", self.node(i), v));
        }
        out
    }
}
