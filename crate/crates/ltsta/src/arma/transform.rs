//! Unconstrained reparameterization of causal/invertible coefficients.
//!
//! The optimizer works in R^(p+q); each coordinate maps through tanh to a
//! partial autocorrelation in (-1, 1) and the Durbin-Levinson recursion
//! turns the partials into polynomial coefficients. The image is exactly
//! the causal (resp. invertible) region, so no constraint handling is
//! needed during optimization. Invertibility of 1 + theta_1 z + .. reduces
//! to causality of 1 - (-theta_1) z - .., hence the sign flips below.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

pub(crate) const ROOT_MARGIN: f64 = 1e-6;

/// Partials are kept this far inside (-1, 1); for orders up to 2 that
/// bounds every characteristic root modulus away from the unit circle by
/// more than ROOT_MARGIN.
const MAX_PACF: f64 = 1.0 - 1e-5;

fn squash(u: f64) -> f64 {
    u.tanh().clamp(-MAX_PACF, MAX_PACF)
}

/// Durbin-Levinson: partial autocorrelations to the coefficients of a
/// causal polynomial 1 - a_1 z - .. - a_k z^k.
pub(crate) fn pacf_to_coeffs(pacf: &[f64]) -> Vec<f64> {
    let k = pacf.len();
    let mut a = vec![0.0; k];
    for step in 0..k {
        let r = pacf[step];
        let prev = a[..step].to_vec();
        for i in 0..step {
            a[i] = prev[i] - r * prev[step - 1 - i];
        }
        a[step] = r;
    }
    a
}

/// Inverse Durbin-Levinson; fails when the coefficients are not causal.
/// The estimation path never maps back to the unconstrained space, so
/// this and the two wrappers below only serve the roundtrip tests.
#[cfg(test)]
pub(crate) fn coeffs_to_pacf(coeffs: &[f64]) -> Result<Vec<f64>> {
    let k = coeffs.len();
    let mut a = coeffs.to_vec();
    let mut pacf = vec![0.0; k];
    for step in (0..k).rev() {
        let r = a[step];
        if !(r.abs() < 1.0) {
            return Err(Error::NonStationaryParams {
                property: "causal",
                reason: format!("partial autocorrelation {r} falls outside (-1, 1)"),
            });
        }
        pacf[step] = r;
        if step > 0 {
            let denom = 1.0 - r * r;
            let cur = a[..step].to_vec();
            for i in 0..step {
                a[i] = (cur[i] + r * cur[step - 1 - i]) / denom;
            }
        }
    }
    Ok(pacf)
}

pub(crate) fn unconstrained_to_ar(u: &[f64]) -> Vec<f64> {
    let pacf: Vec<f64> = u.iter().map(|&v| squash(v)).collect();
    pacf_to_coeffs(&pacf)
}

#[cfg(test)]
pub(crate) fn ar_to_unconstrained(phi: &[f64]) -> Result<Vec<f64>> {
    Ok(coeffs_to_pacf(phi)?.iter().map(|r| r.atanh()).collect())
}

pub(crate) fn unconstrained_to_ma(u: &[f64]) -> Vec<f64> {
    unconstrained_to_ar(u).iter().map(|a| -a).collect()
}

#[cfg(test)]
pub(crate) fn ma_to_unconstrained(theta: &[f64]) -> Result<Vec<f64>> {
    let negated: Vec<f64> = theta.iter().map(|t| -t).collect();
    ar_to_unconstrained(&negated).map_err(|_| Error::NonStationaryParams {
        property: "invertible",
        reason: "moving-average coefficients are not invertible".into(),
    })
}

/// Checks the root conditions: every root of 1 - c_1 z - .. - c_k z^k must
/// lie outside the unit circle by more than ROOT_MARGIN, equivalently
/// every companion eigenvalue strictly inside 1/(1 + ROOT_MARGIN).
fn check_roots(coeffs: &[f64], property: &'static str) -> Result<()> {
    let k = coeffs.len();
    if k == 0 {
        return Ok(());
    }
    let mut comp = DMatrix::zeros(k, k);
    for (j, &c) in coeffs.iter().enumerate() {
        comp[(0, j)] = c;
    }
    for i in 1..k {
        comp[(i, i - 1)] = 1.0;
    }
    let max_mod = comp
        .complex_eigenvalues()
        .iter()
        .map(|e| e.norm())
        .fold(0.0, f64::max);
    if !(max_mod < 1.0 / (1.0 + ROOT_MARGIN)) {
        return Err(Error::NonStationaryParams {
            property,
            reason: format!(
                "characteristic root modulus {:.8} is not above the 1 + 1e-6 margin",
                if max_mod > 0.0 { 1.0 / max_mod } else { f64::INFINITY }
            ),
        });
    }
    Ok(())
}

pub(crate) fn validate_params(phi: &[f64], theta: &[f64]) -> Result<()> {
    check_roots(phi, "causal")?;
    let negated: Vec<f64> = theta.iter().map(|t| -t).collect();
    check_roots(&negated, "invertible")
}
