//! The assembled model: continuous piecewise-linear trend with estimated
//! breaks, Fourier seasonality, and ARMA errors, estimated in four steps
//! and forecast with conditional intervals.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::arma::{self, ArmaFit, OrderCaps, RegArmaFit};
use crate::diagnostics::{diagnose, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::linalg;
use crate::seasonal::{self, SeasonalFit};
use crate::selection::{self, SelectionPolicy, SelectionReport};
use crate::series::{TimeSeries, Transform};
use crate::trend::{self, Segmentation, TrendFit};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LtstaConfig {
    pub transform: Transform,
    /// Minimum regime length, including the virtual endpoints.
    pub h: usize,
    /// Break budget for the search; a length-based default when absent.
    pub m_max: Option<usize>,
    pub policy: SelectionPolicy,
    /// Fixed break count, bypassing the selection heuristics.
    pub manual_m: Option<usize>,
    /// Cap on seasonal harmonics; the Nyquist limit applies regardless.
    pub n_max: Option<usize>,
    pub p_max: usize,
    pub q_max: usize,
    /// Additional rounds of the order-selection and break-refinement
    /// steps. One round is almost always enough.
    pub extra_passes: usize,
}

impl Default for LtstaConfig {
    fn default() -> Self {
        LtstaConfig {
            transform: Transform::identity(),
            h: 2,
            m_max: None,
            policy: SelectionPolicy::Absolute,
            manual_m: None,
            n_max: None,
            p_max: 2,
            q_max: 2,
            extra_passes: 0,
        }
    }
}

/// A fitted model. The stored components decompose the transformed series
/// as trend + seasonal + ARMA one-step prediction + innovation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LtstaModel {
    pub transform: Transform,
    /// The transformed training series the components refer to.
    pub transformed: Vec<f64>,
    pub period: usize,
    pub trend: TrendFit,
    pub seasonal: SeasonalFit,
    pub arma: ArmaFit,
    /// One-step-ahead prediction errors of the final joint fit.
    pub residuals: Vec<f64>,
    /// Break-count selection trace from the initial segmentation.
    pub selection: SelectionReport,
    /// Absent when there are too few residuals for the tests.
    pub diagnostics: Option<DiagnosticsReport>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastStep {
    pub trend: f64,
    pub seasonal: f64,
    pub arma: f64,
}

/// Forecasts on the original scale with central conditional intervals.
/// The intervals carry ARMA forecast variance only; break placement and
/// parameter uncertainty are not included.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForecastResult {
    pub horizon: usize,
    pub level: f64,
    pub point: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Per-step component contributions on the transformed scale.
    pub components: Vec<ForecastStep>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRow {
    pub name: String,
    pub coef: f64,
    pub std_err: f64,
    pub z: f64,
    pub p_value: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSummary {
    pub n: usize,
    pub m: usize,
    pub breaks: Vec<usize>,
    pub n_harmonics: usize,
    pub p: usize,
    pub q: usize,
    /// Coefficient table: trend, seasonal, and ARMA parameters, then the
    /// innovation variance. Intervals are conditional on the breaks.
    pub rows: Vec<SummaryRow>,
    pub loglik: f64,
    pub aicc: f64,
    pub diagnostics: Option<DiagnosticsReport>,
    pub warnings: Vec<String>,
}

impl LtstaModel {
    /// Four-step estimation: segment the transformed series and choose the
    /// break count; choose seasonal and ARMA orders on the detrended
    /// series; re-segment with seasonality and the ARMA predictions
    /// removed; estimate everything jointly with the orders frozen.
    pub fn fit(series: &TimeSeries, config: &LtstaConfig) -> Result<LtstaModel> {
        if config.h == 0 {
            return Err(Error::InvalidParameter {
                name: "h",
                reason: "minimum regime length must be at least 1".into(),
            });
        }
        let y = series.values();
        let n = y.len();
        let period = series.period();
        let w = config.transform.apply(y)?;
        let mut warnings: Vec<String> = Vec::new();

        let mut budget = config
            .m_max
            .unwrap_or_else(|| selection::default_m_max(n, config.h));
        if let Some(m) = config.manual_m {
            budget = budget.max(m);
        }

        let table1 = trend::dp_segment(&w, budget, config.h)?;
        warnings.extend(table1.warnings().iter().cloned());
        let curve = table1.ssr_curve();
        let report = match config.manual_m {
            Some(m) => selection::manual_report(&curve, m)?,
            None => selection::select_num_breaks(&curve, config.policy)?,
        };
        warnings.extend(report.warnings.iter().cloned());
        let m = report.m_selected;
        let mut seg = table1.best(m).0.clone();
        let initial_breaks = seg.breaks().to_vec();

        let caps = OrderCaps {
            n_max: config.n_max,
            p_max: config.p_max,
            q_max: config.q_max,
        };
        let mut order_sel = None;
        for _ in 0..=config.extra_passes {
            let t_fit = trend::fit_ols(&w, &seg)?;
            let tv = t_fit.values(1, n);
            let detrended: Vec<f64> = w.iter().zip(&tv).map(|(a, b)| a - b).collect();
            let sel = arma::select_orders(&detrended, period, &caps)?;
            let sv = sel.seasonal.values(1, n);
            // Strip seasonality and the ARMA one-step predictions; what is
            // left is trend plus innovation, the cleanest segmentation
            // target.
            let adjusted: Vec<f64> = (0..n)
                .map(|t| {
                    let z = detrended[t] - sv[t];
                    let z_fitted = z - sel.fit.residuals[t];
                    w[t] - sv[t] - z_fitted
                })
                .collect();
            if m > 0 {
                let table3 = trend::dp_segment(&adjusted, m, config.h)?;
                warnings.extend(table3.warnings().iter().cloned());
                seg = table3.best(m).0.clone();
            }
            order_sel = Some(sel);
        }
        let sel = order_sel.expect("at least one pass runs");
        if !sel.skipped.is_empty() {
            warnings.push(format!(
                "order search skipped {} combination(s): {}",
                sel.skipped.len(),
                sel.skipped.join("; ")
            ));
        }
        if seg.breaks() != initial_breaks {
            warnings.push(format!(
                "refinement moved the breaks from {:?} to {:?}",
                initial_breaks,
                seg.breaks()
            ));
        }

        let x = joint_design(n, &seg, period, sel.n_harmonics)?;
        let final_fit = match arma::fit_reg_arma(&w, &x, sel.p, sel.q) {
            Ok(f) => f,
            Err(Error::DegenerateVariance { sigma2, floor }) if sigma2 == 0.0 && floor == 0.0 => {
                warnings.push(
                    "deterministic components reproduce the series exactly; \
                     noise statistics are degenerate"
                        .into(),
                );
                exact_joint_fit(&w, &x)?
            }
            Err(e) => return Err(e),
        };
        if !final_fit.arma.converged {
            warnings.push("final joint optimization stopped at the iteration cap".into());
        }

        let n_trend_cols = seg.m() + 2;
        let mut trend_fit = TrendFit {
            segmentation: seg.clone(),
            beta0_first: final_fit.regressor_coefs[0],
            slopes: final_fit.regressor_coefs[1..n_trend_cols].to_vec(),
            ssr: 0.0,
        };
        let tv = trend_fit.values(1, n);
        trend_fit.ssr = w.iter().zip(&tv).map(|(a, b)| (a - b).powi(2)).sum();
        let seasonal_fit = if sel.n_harmonics == 0 {
            SeasonalFit::zero(period)
        } else {
            SeasonalFit::from_design_coefficients(
                period,
                sel.n_harmonics,
                &final_fit.regressor_coefs[n_trend_cols..],
            )?
        };
        if let Some(&c) = seg.breaks().last() {
            if n - c <= config.h {
                warnings.push(format!(
                    "break at index {c} lies within {} point(s) of the series end",
                    n - c
                ));
            }
        }

        let residuals = final_fit.residuals;
        let diagnostics = match diagnose(&residuals) {
            Ok(d) => Some(d),
            Err(Error::TooFewResiduals { .. }) => None,
            Err(e) => return Err(e),
        };

        Ok(LtstaModel {
            transform: config.transform,
            transformed: w,
            period,
            trend: trend_fit,
            seasonal: seasonal_fit,
            arma: final_fit.arma,
            residuals,
            selection: report,
            diagnostics,
            warnings,
        })
    }

    pub fn n(&self) -> usize {
        self.transformed.len()
    }

    /// The ARMA error series: transformed values minus trend and
    /// seasonality.
    pub fn error_series(&self) -> Vec<f64> {
        let n = self.n();
        let tv = self.trend.values(1, n);
        let sv = self.seasonal.values(1, n);
        (0..n)
            .map(|t| self.transformed[t] - tv[t] - sv[t])
            .collect()
    }

    /// One-step-ahead ARMA predictions: error series minus innovations.
    pub fn arma_fitted(&self) -> Vec<f64> {
        self.error_series()
            .iter()
            .zip(&self.residuals)
            .map(|(z, e)| z - e)
            .collect()
    }

    /// Extends each component past the sample and wraps the ARMA forecast
    /// variance in central normal intervals, mapped back through the
    /// transform.
    pub fn forecast(&self, horizon: usize, level: f64) -> Result<ForecastResult> {
        if horizon == 0 {
            return Err(Error::InvalidParameter {
                name: "horizon",
                reason: "at least one forecast step is required".into(),
            });
        }
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::InvalidParameter {
                name: "level",
                reason: format!("interval level {level} is outside (0, 1)"),
            });
        }
        let n = self.n();
        let history = self.error_series();
        let (means, vars) = arma::forecast_arma(&self.arma, &history, horizon)?;
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let zq = normal.inverse_cdf(0.5 + level / 2.0);

        let mut point_w = Vec::with_capacity(horizon);
        let mut lower_w = Vec::with_capacity(horizon);
        let mut upper_w = Vec::with_capacity(horizon);
        let mut components = Vec::with_capacity(horizon);
        for k in 1..=horizon {
            let t = n + k;
            let step = ForecastStep {
                trend: self.trend.value_at(t),
                seasonal: self.seasonal.value_at(t),
                arma: means[k - 1],
            };
            let center = step.trend + step.seasonal + step.arma;
            let half = zq * vars[k - 1].max(0.0).sqrt();
            point_w.push(center);
            lower_w.push(center - half);
            upper_w.push(center + half);
            components.push(step);
        }
        let point = self.transform.invert(&point_w)?;
        let lower = lower_w
            .iter()
            .map(|&v| self.transform.invert_saturating(v))
            .collect();
        let upper = upper_w
            .iter()
            .map(|&v| self.transform.invert_saturating(v))
            .collect();
        Ok(ForecastResult {
            horizon,
            level,
            point,
            lower,
            upper,
            components,
        })
    }

    /// Coefficient table with standard errors from the numerical Hessian
    /// of the exact likelihood, plus the diagnostics block. For a
    /// degenerate exact fit the standard errors are zero and z and p are
    /// reported as zero.
    pub fn summarize(&self) -> Result<ModelSummary> {
        let n = self.n();
        let m = self.trend.segmentation.m();
        let n_harmonics = self.seasonal.n_harmonics();
        let x = joint_design(n, &self.trend.segmentation, self.period, n_harmonics)?;

        let mut coefs = Vec::with_capacity(x.ncols());
        let mut names = Vec::new();
        coefs.push(self.trend.beta0_first);
        names.push("beta0^(1)".to_string());
        for (i, s) in self.trend.slopes.iter().enumerate() {
            coefs.push(*s);
            names.push(format!("beta1^({})", i + 1));
        }
        for (k, &(a, b)) in self.seasonal.coefficients().iter().enumerate() {
            let harmonic = k + 1;
            coefs.push(a);
            names.push(format!("a{harmonic}"));
            if !(self.period % 2 == 0 && harmonic == self.period / 2) {
                coefs.push(b);
                names.push(format!("b{harmonic}"));
            }
        }
        for i in 0..self.arma.p {
            names.push(format!("phi{}", i + 1));
        }
        for j in 0..self.arma.q {
            names.push(format!("theta{}", j + 1));
        }
        names.push("sigma2".to_string());

        let reg = RegArmaFit {
            regressor_coefs: coefs.clone(),
            arma: self.arma.clone(),
            residuals: self.residuals.clone(),
        };
        let ses = if self.arma.sigma2 == 0.0 {
            vec![0.0; names.len()]
        } else {
            arma::reg_arma_standard_errors(&self.transformed, &x, &reg)?
        };

        let mut values = coefs;
        values.extend_from_slice(&self.arma.phi);
        values.extend_from_slice(&self.arma.theta);
        values.push(self.arma.sigma2);

        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let q975 = normal.inverse_cdf(0.975);
        let rows = names
            .into_iter()
            .zip(values)
            .zip(&ses)
            .map(|((name, coef), &se)| {
                let (z, p_value) = if se > 0.0 {
                    let z = coef / se;
                    (z, (2.0 * normal.cdf(-z.abs())).clamp(0.0, 1.0))
                } else {
                    (0.0, 0.0)
                };
                SummaryRow {
                    name,
                    coef,
                    std_err: se,
                    z,
                    p_value,
                    ci_lower: coef - q975 * se,
                    ci_upper: coef + q975 * se,
                }
            })
            .collect();

        Ok(ModelSummary {
            n,
            m,
            breaks: self.trend.segmentation.breaks().to_vec(),
            n_harmonics,
            p: self.arma.p,
            q: self.arma.q,
            rows,
            loglik: self.arma.loglik,
            aicc: self.arma.aicc,
            diagnostics: self.diagnostics.clone(),
            warnings: self.warnings.clone(),
        })
    }
}

fn joint_design(
    n: usize,
    seg: &Segmentation,
    period: usize,
    n_harmonics: usize,
) -> Result<DMatrix<f64>> {
    let trend_design = trend::build_design_matrix(n, seg)?;
    if n_harmonics == 0 {
        return Ok(trend_design);
    }
    let fourier = seasonal::fourier_design(n, period, n_harmonics)?;
    let mut x = DMatrix::zeros(n, trend_design.ncols() + fourier.ncols());
    x.view_mut((0, 0), (n, trend_design.ncols()))
        .copy_from(&trend_design);
    x.view_mut((0, trend_design.ncols()), (n, fourier.ncols()))
        .copy_from(&fourier);
    Ok(x)
}

/// Plain least squares stand-in for the joint fit when the design
/// reproduces the series exactly. sigma2 = 0 marks the degeneracy;
/// loglik and AICc are reported as 0 and are not comparable to regular
/// fits.
fn exact_joint_fit(w: &[f64], x: &DMatrix<f64>) -> Result<RegArmaFit> {
    let beta = linalg::lstsq(x, &DVector::from_column_slice(w))?;
    let fitted = x * &beta;
    let residuals = w.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    Ok(RegArmaFit {
        regressor_coefs: beta.iter().copied().collect(),
        arma: ArmaFit {
            p: 0,
            q: 0,
            phi: vec![],
            theta: vec![],
            sigma2: 0.0,
            loglik: 0.0,
            aicc: 0.0,
            converged: true,
        },
        residuals,
    })
}
