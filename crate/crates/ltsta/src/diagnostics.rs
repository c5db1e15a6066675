//! Residual diagnostics: lag-1 Ljung-Box, Jarque-Bera, and a
//! thirds-ratio heteroscedasticity test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};

/// A test statistic with its p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatTest {
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// Ljung-Box statistic at lag 1, against chi-squared(1).
    pub ljung_box_l1: StatTest,
    /// Jarque-Bera normality statistic, against chi-squared(2).
    pub jarque_bera: StatTest,
    /// Ratio of the last third's residual sum of squares to the first
    /// third's, with a two-sided F p-value. Values far from 1 in either
    /// direction indicate changing variance.
    pub heteroscedasticity_h: StatTest,
    pub skew: f64,
    /// Plain (not excess) kurtosis; 3 for a normal distribution.
    pub kurtosis: f64,
}

const MIN_RESIDUALS: usize = 8;

/// Standard residual checks on a fitted model's innovation sequence.
///
/// Residuals with exactly zero variance produce the neutral report
/// (statistics at their null values, p-values 1) rather than NaNs.
pub fn diagnose(residuals: &[f64]) -> Result<DiagnosticsReport> {
    let n = residuals.len();
    if n < MIN_RESIDUALS {
        return Err(Error::TooFewResiduals {
            required: MIN_RESIDUALS,
            actual: n,
        });
    }
    let nf = n as f64;
    let mean = residuals.iter().sum::<f64>() / nf;
    let centered: Vec<f64> = residuals.iter().map(|r| r - mean).collect();
    let m2 = centered.iter().map(|c| c * c).sum::<f64>() / nf;

    if m2 == 0.0 {
        return Ok(DiagnosticsReport {
            ljung_box_l1: StatTest {
                statistic: 0.0,
                p_value: 1.0,
            },
            jarque_bera: StatTest {
                statistic: 0.0,
                p_value: 1.0,
            },
            heteroscedasticity_h: StatTest {
                statistic: 1.0,
                p_value: 1.0,
            },
            skew: 0.0,
            kurtosis: 3.0,
        });
    }

    let m3 = centered.iter().map(|c| c.powi(3)).sum::<f64>() / nf;
    let m4 = centered.iter().map(|c| c.powi(4)).sum::<f64>() / nf;
    let skew = m3 / m2.powf(1.5);
    let kurtosis = m4 / (m2 * m2);

    let r1 = centered
        .windows(2)
        .map(|w| w[0] * w[1])
        .sum::<f64>()
        / centered.iter().map(|c| c * c).sum::<f64>();
    let q = nf * (nf + 2.0) * r1 * r1 / (nf - 1.0);
    let chi1 = ChiSquared::new(1.0).expect("valid dof");
    let q_p = chi1.sf(q).clamp(0.0, 1.0);

    let jb = nf / 6.0 * (skew * skew + (kurtosis - 3.0).powi(2) / 4.0);
    let chi2 = ChiSquared::new(2.0).expect("valid dof");
    let jb_p = chi2.sf(jb).clamp(0.0, 1.0);

    let third = n / 3;
    let ssr_first: f64 = residuals[..third].iter().map(|r| r * r).sum();
    let ssr_last: f64 = residuals[n - third..].iter().map(|r| r * r).sum();
    let (h, h_p) = if ssr_first == 0.0 && ssr_last == 0.0 {
        (1.0, 1.0)
    } else if ssr_first == 0.0 {
        (f64::MAX, 0.0)
    } else {
        let h = ssr_last / ssr_first;
        let f = FisherSnedecor::new(third as f64, third as f64).expect("valid dof");
        (h, (2.0 * f.cdf(h).min(f.sf(h))).clamp(0.0, 1.0))
    };

    Ok(DiagnosticsReport {
        ljung_box_l1: StatTest {
            statistic: q,
            p_value: q_p,
        },
        jarque_bera: StatTest {
            statistic: jb,
            p_value: jb_p,
        },
        heteroscedasticity_h: StatTest {
            statistic: h,
            p_value: h_p,
        },
        skew,
        kurtosis,
    })
}
