//! Trigonometric seasonality: Fourier regressors and fitted coefficients.
//!
//! The seasonal component is a sum of N harmonics at the seasonal period
//! P, S_t = sum_k a_k cos(2 pi k t / P) + b_k sin(2 pi k t / P), with t the
//! 1-based global time index. Keeping t global (rather than a within-cycle
//! phase) makes the phase consistent across trend regimes and lets the
//! same formula extend past the sample for forecasting.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Fitted harmonic coefficients at period P.
///
/// When P is even, the top harmonic k = P/2 has sin(pi t) = 0 at every
/// integer t; that sine carries no information, its coefficient is pinned
/// at zero, and the corresponding design column is dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalFit {
    period: usize,
    n_harmonics: usize,
    /// (a_k, b_k) per harmonic, k = 1..n_harmonics.
    coefficients: Vec<(f64, f64)>,
}

impl SeasonalFit {
    pub fn new(period: usize, coefficients: Vec<(f64, f64)>) -> Result<Self> {
        let n_harmonics = coefficients.len();
        check_harmonics(period, n_harmonics)?;
        if period % 2 == 0 && n_harmonics == period / 2 {
            let (_, b) = coefficients[n_harmonics - 1];
            if b != 0.0 {
                return Err(Error::InvalidParameter {
                    name: "coefficients",
                    reason: format!(
                        "sine coefficient of the top harmonic must be 0 for even period {period}"
                    ),
                });
            }
        }
        Ok(SeasonalFit {
            period,
            n_harmonics,
            coefficients,
        })
    }

    /// The N = 0 fit: identically zero seasonality.
    pub fn zero(period: usize) -> Self {
        SeasonalFit {
            period,
            n_harmonics: 0,
            coefficients: vec![],
        }
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn n_harmonics(&self) -> usize {
        self.n_harmonics
    }

    pub fn coefficients(&self) -> &[(f64, f64)] {
        &self.coefficients
    }

    /// S_t at a single 1-based time index.
    pub fn value_at(&self, t: usize) -> f64 {
        let p = self.period as f64;
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let w = TAU * (i + 1) as f64 * t as f64 / p;
                a * w.cos() + b * w.sin()
            })
            .sum()
    }

    /// S_t over an inclusive 1-based range.
    pub fn values(&self, t_from: usize, t_to: usize) -> Vec<f64> {
        (t_from..=t_to).map(|t| self.value_at(t)).collect()
    }

    /// Builds a fit from the flat coefficient layout of [`fourier_design`]
    /// columns: a_1, b_1, a_2, b_2, .. with the final sine absent when the
    /// design dropped it.
    pub fn from_design_coefficients(period: usize, n_harmonics: usize, flat: &[f64]) -> Result<Self> {
        check_harmonics(period, n_harmonics)?;
        let expected = design_width(period, n_harmonics);
        if flat.len() != expected {
            return Err(Error::LengthMismatch {
                left: "design columns",
                left_len: expected,
                right: "coefficients",
                right_len: flat.len(),
            });
        }
        let mut coefficients = Vec::with_capacity(n_harmonics);
        for k in 1..=n_harmonics {
            let a = flat[2 * (k - 1)];
            let b = if 2 * k - 1 < flat.len() || !nyquist_dropped(period, n_harmonics) {
                flat[2 * k - 1]
            } else {
                0.0
            };
            coefficients.push((a, b));
        }
        SeasonalFit::new(period, coefficients)
    }
}

fn check_harmonics(period: usize, n_harmonics: usize) -> Result<()> {
    if period < 2 && n_harmonics > 0 {
        return Err(Error::InvalidPeriod { period });
    }
    if n_harmonics > period / 2 {
        return Err(Error::HarmonicsOutOfRange {
            n_harmonics,
            period,
            max: period / 2,
        });
    }
    Ok(())
}

fn nyquist_dropped(period: usize, n_harmonics: usize) -> bool {
    period % 2 == 0 && n_harmonics == period / 2
}

/// Number of columns [`fourier_design`] produces: 2N, minus one when the
/// top harmonic's sine column degenerates.
pub fn design_width(period: usize, n_harmonics: usize) -> usize {
    if n_harmonics == 0 {
        0
    } else if nyquist_dropped(period, n_harmonics) {
        2 * n_harmonics - 1
    } else {
        2 * n_harmonics
    }
}

/// Fourier regressor matrix: columns cos(2 pi k t / P), sin(2 pi k t / P)
/// for k = 1..N at t = 1..n, with the identically-zero sine column of the
/// top even-period harmonic omitted.
pub fn fourier_design(n: usize, period: usize, n_harmonics: usize) -> Result<DMatrix<f64>> {
    if n_harmonics < 1 {
        return Err(Error::HarmonicsOutOfRange {
            n_harmonics,
            period,
            max: period / 2,
        });
    }
    check_harmonics(period, n_harmonics)?;
    let width = design_width(period, n_harmonics);
    let p = period as f64;
    let mut x = DMatrix::zeros(n, width);
    for t in 1..=n {
        let row = t - 1;
        for k in 1..=n_harmonics {
            let w = TAU * k as f64 * t as f64 / p;
            x[(row, 2 * (k - 1))] = w.cos();
            if !(nyquist_dropped(period, n_harmonics) && k == n_harmonics) {
                x[(row, 2 * k - 1)] = w.sin();
            }
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quarter_cycle_first_harmonic() {
        let x = fourier_design(4, 4, 1).unwrap();
        assert_eq!(x.ncols(), 2);
        let cos_expected = [0.0, -1.0, 0.0, 1.0];
        let sin_expected = [1.0, 0.0, -1.0, 0.0];
        for t in 0..4 {
            assert_relative_eq!(x[(t, 0)], cos_expected[t], epsilon = 1e-12);
            assert_relative_eq!(x[(t, 1)], sin_expected[t], epsilon = 1e-12);
        }
    }

    #[test]
    fn nyquist_sine_column_is_dropped() {
        let x = fourier_design(4, 4, 2).unwrap();
        assert_eq!(x.ncols(), 3);
        let cos2_expected = [-1.0, 1.0, -1.0, 1.0];
        for t in 0..4 {
            assert_relative_eq!(x[(t, 2)], cos2_expected[t], epsilon = 1e-12);
        }
    }

    #[test]
    fn full_monthly_design_is_orthogonal_over_cycles() {
        let x = fourier_design(24, 12, 6).unwrap();
        assert_eq!(x.ncols(), 11);
        let gram = x.transpose() * &x;
        for r in 0..11 {
            for c in 0..11 {
                if r != c {
                    assert!(
                        gram[(r, c)].abs() < 1e-9,
                        "off-diagonal ({r}, {c}) = {}",
                        gram[(r, c)]
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_out_of_range_harmonics() {
        assert!(matches!(
            fourier_design(10, 4, 3),
            Err(Error::HarmonicsOutOfRange { max: 2, .. })
        ));
        assert!(fourier_design(10, 4, 0).is_err());
    }

    #[test]
    fn single_cosine_values() {
        let fit = SeasonalFit::new(4, vec![(1.0, 0.0)]).unwrap();
        let expected = [0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0];
        let got = fit.values(1, 8);
        for (g, e) in got.iter().zip(expected) {
            assert_relative_eq!(*g, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_fit_is_identically_zero() {
        let fit = SeasonalFit::zero(12);
        assert!(fit.values(1, 30).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn values_are_periodic() {
        let fit = SeasonalFit::new(12, vec![(0.4, -0.3), (0.1, 0.2), (-0.05, 0.07)]).unwrap();
        for t in 1..=36 {
            assert_relative_eq!(fit.value_at(t + 12), fit.value_at(t), epsilon = 1e-12);
        }
    }

    #[test]
    fn values_sum_to_zero_over_a_cycle() {
        let fit = SeasonalFit::new(6, vec![(0.9, 0.2), (-0.3, 0.5), (0.11, 0.0)]).unwrap();
        for start in 1..=6 {
            let total: f64 = fit.values(start, start + 5).iter().sum();
            assert!(total.abs() < 1e-9, "window at {start} sums to {total}");
        }
    }

    #[test]
    fn top_even_harmonic_requires_zero_sine() {
        assert!(SeasonalFit::new(4, vec![(0.1, 0.2), (0.3, 0.4)]).is_err());
        assert!(SeasonalFit::new(4, vec![(0.1, 0.2), (0.3, 0.0)]).is_ok());
        // Odd periods keep the sine of their top harmonic.
        assert!(SeasonalFit::new(5, vec![(0.1, 0.2), (0.3, 0.4)]).is_ok());
    }

    #[test]
    fn design_and_fit_agree() {
        let fit = SeasonalFit::new(12, vec![(0.4, -0.3), (0.1, 0.2)]).unwrap();
        let flat = [0.4, -0.3, 0.1, 0.2];
        let x = fourier_design(18, 12, 2).unwrap();
        for t in 1..=18 {
            let from_design: f64 = (0..4).map(|c| x[(t - 1, c)] * flat[c]).sum();
            assert_relative_eq!(fit.value_at(t), from_design, epsilon = 1e-12);
        }
        let rebuilt = SeasonalFit::from_design_coefficients(12, 2, &flat).unwrap();
        assert_eq!(rebuilt, fit);
    }

    #[test]
    fn design_coefficients_handle_dropped_nyquist() {
        let fit = SeasonalFit::from_design_coefficients(4, 2, &[0.5, -0.2, 0.8]).unwrap();
        assert_eq!(fit.coefficients(), &[(0.5, -0.2), (0.8, 0.0)]);
        assert!(SeasonalFit::from_design_coefficients(4, 2, &[0.5, -0.2, 0.8, 0.1]).is_err());
    }

    #[test]
    fn spans_centered_seasonal_dummies() {
        // With N = floor(P/2) the harmonic columns span the same space as
        // centered per-phase dummies: projecting each dummy contrast onto
        // the design leaves no residual.
        for period in [4usize, 5, 12] {
            let n = 3 * period;
            let n_h = period / 2;
            let x = fourier_design(n, period, n_h).unwrap();
            let svd = x.clone().svd(true, true);
            for phase in 0..period - 1 {
                let mut dummy = nalgebra::DVector::from_element(n, -1.0 / period as f64);
                for t in 0..n {
                    if t % period == phase {
                        dummy[t] += 1.0;
                    }
                }
                let beta = svd.solve(&dummy, 0.0).unwrap();
                let residual = &dummy - &x * beta;
                assert!(
                    residual.norm() < 1e-9,
                    "period {period} phase {phase}: residual {}",
                    residual.norm()
                );
            }
        }
    }
}
