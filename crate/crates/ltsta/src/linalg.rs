//! Least-squares and small dense solves shared across the crate.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Relative cutoff below which the smallest singular value marks the
/// design as rank deficient.
pub(crate) const RANK_TOLERANCE: f64 = 1e-10;

/// Minimum-norm least-squares solution of `x * beta = y` via singular value
/// decomposition. Errors if the smallest singular value falls below
/// [`RANK_TOLERANCE`] relative to the largest.
pub(crate) fn lstsq(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = x.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let min_sv = svd.singular_values.min();
    let ratio = if max_sv > 0.0 { min_sv / max_sv } else { 0.0 };
    if !(ratio > RANK_TOLERANCE) {
        return Err(Error::RankDeficient { ratio });
    }
    svd.solve(y, 0.0)
        .map_err(|_| Error::RankDeficient { ratio })
}

/// Residual sum of squares of `y - x * beta`.
pub(crate) fn residual_ssr(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let fitted = x * beta;
    y.iter()
        .zip(fitted.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}
