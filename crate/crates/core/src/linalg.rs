//! Dense linear algebra backed by nalgebra.

use nalgebra::{DMatrix, DVector};

/// Solves `A x = b` for symmetric `A`, trying Cholesky first and falling
/// back to partially pivoted LU. `None` when `A` is numerically singular.
pub(crate) fn solve_symmetric(a: DMatrix<f64>, b: DVector<f64>) -> Option<DVector<f64>> {
    if let Some(chol) = a.clone().cholesky() {
        let x = chol.solve(&b);
        if x.iter().all(|v| v.is_finite()) {
            return Some(x);
        }
    }
    let x = a.lu().solve(&b)?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Smallest eigenvalue of a symmetric matrix.
pub(crate) fn min_eigenvalue(a: DMatrix<f64>) -> f64 {
    a.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Largest and smallest eigenvalue of a symmetric matrix.
pub(crate) fn eigen_range(a: DMatrix<f64>) -> (f64, f64) {
    let ev = a.symmetric_eigenvalues();
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}
