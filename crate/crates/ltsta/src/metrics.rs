//! Forecast accuracy metrics and the trivial baselines used to anchor
//! them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub mae: f64,
    pub rmse: f64,
    /// Symmetric MAPE in percent, bounded by 200.
    pub smape_percent: f64,
    /// Forecast MAE scaled by the training series' seasonal-naive MAE.
    pub mase: f64,
}

/// MAE, RMSE, sMAPE, and MASE of a forecast against the realized values.
///
/// The MASE denominator is the in-sample seasonal-naive MAE of `train` at
/// lag `period`; an exactly periodic training series has no scale and is
/// rejected. sMAPE terms where forecast and actual are both zero count
/// as zero.
pub fn compute_metrics(
    forecast: &[f64],
    actual: &[f64],
    train: &[f64],
    period: usize,
) -> Result<MetricSet> {
    if forecast.len() != actual.len() {
        return Err(Error::LengthMismatch {
            left: "forecast",
            left_len: forecast.len(),
            right: "actual",
            right_len: actual.len(),
        });
    }
    if forecast.is_empty() {
        return Err(Error::InvalidParameter {
            name: "forecast",
            reason: "at least one forecast step is required".into(),
        });
    }
    if period == 0 {
        return Err(Error::InvalidPeriod { period });
    }
    if train.len() <= period {
        return Err(Error::SeriesTooShort {
            required: period + 1,
            actual: train.len(),
        });
    }
    let f = forecast.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut smape_sum = 0.0;
    for (yhat, y) in forecast.iter().zip(actual) {
        let e = (yhat - y).abs();
        abs_sum += e;
        sq_sum += e * e;
        let denom = (yhat.abs() + y.abs()) / 2.0;
        if denom > 0.0 {
            smape_sum += e / denom;
        }
    }
    let mae = abs_sum / f;
    let rmse = (sq_sum / f).sqrt();
    let smape_percent = 100.0 * smape_sum / f;

    let lagged: f64 = train
        .iter()
        .skip(period)
        .zip(train)
        .map(|(a, b)| (a - b).abs())
        .sum();
    let scale = lagged / (train.len() - period) as f64;
    if scale == 0.0 {
        return Err(Error::ZeroDenominator);
    }

    Ok(MetricSet {
        mae,
        rmse,
        smape_percent,
        mase: mae / scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub mean: MetricSet,
    pub median: MetricSet,
}

/// Mean and median of each metric across series.
pub fn aggregate(per_series: &[MetricSet]) -> Result<AggregateMetrics> {
    if per_series.is_empty() {
        return Err(Error::InvalidParameter {
            name: "per_series",
            reason: "aggregation needs at least one series".into(),
        });
    }
    let pick = |get: fn(&MetricSet) -> f64| {
        let mut vals: Vec<f64> = per_series.iter().map(get).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        vals.sort_by(|a, b| a.total_cmp(b));
        let mid = vals.len() / 2;
        let median = if vals.len() % 2 == 1 {
            vals[mid]
        } else {
            (vals[mid - 1] + vals[mid]) / 2.0
        };
        (mean, median)
    };
    let (mae_mean, mae_med) = pick(|m| m.mae);
    let (rmse_mean, rmse_med) = pick(|m| m.rmse);
    let (smape_mean, smape_med) = pick(|m| m.smape_percent);
    let (mase_mean, mase_med) = pick(|m| m.mase);
    Ok(AggregateMetrics {
        mean: MetricSet {
            mae: mae_mean,
            rmse: rmse_mean,
            smape_percent: smape_mean,
            mase: mase_mean,
        },
        median: MetricSet {
            mae: mae_med,
            rmse: rmse_med,
            smape_percent: smape_med,
            mase: mase_med,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineMethod {
    /// Repeat the last observation.
    Naive,
    /// Repeat the last full cycle of the given period.
    SeasonalNaive { period: usize },
    /// Simple exponential smoothing; `alpha: None` picks the level on a
    /// 0.01 grid by one-step in-sample squared error.
    Ses { alpha: Option<f64> },
}

/// Flat-line, last-cycle, and exponentially smoothed reference forecasts.
pub fn baseline_forecast(train: &[f64], method: BaselineMethod, horizon: usize) -> Result<Vec<f64>> {
    if train.is_empty() {
        return Err(Error::SeriesTooShort {
            required: 1,
            actual: 0,
        });
    }
    match method {
        BaselineMethod::Naive => Ok(vec![train[train.len() - 1]; horizon]),
        BaselineMethod::SeasonalNaive { period } => {
            if period == 0 {
                return Err(Error::InvalidPeriod { period });
            }
            if train.len() < period {
                return Err(Error::SeriesTooShort {
                    required: period,
                    actual: train.len(),
                });
            }
            let cycle = &train[train.len() - period..];
            Ok((0..horizon).map(|k| cycle[k % period]).collect())
        }
        BaselineMethod::Ses { alpha } => {
            let alpha = match alpha {
                Some(a) => {
                    if !(a > 0.0 && a <= 1.0) {
                        return Err(Error::InvalidParameter {
                            name: "alpha",
                            reason: format!("smoothing weight {a} is outside (0, 1]"),
                        });
                    }
                    a
                }
                None => best_ses_alpha(train),
            };
            let mut level = train[0];
            for y in &train[1..] {
                level = alpha * y + (1.0 - alpha) * level;
            }
            Ok(vec![level; horizon])
        }
    }
}

fn ses_sse(train: &[f64], alpha: f64) -> f64 {
    let mut level = train[0];
    let mut sse = 0.0;
    for y in &train[1..] {
        sse += (y - level).powi(2);
        level = alpha * y + (1.0 - alpha) * level;
    }
    sse
}

fn best_ses_alpha(train: &[f64]) -> f64 {
    let mut best = (0.01, f64::INFINITY);
    for i in 1..=99 {
        let alpha = i as f64 / 100.0;
        let sse = ses_sse(train, alpha);
        if sse < best.1 {
            best = (alpha, sse);
        }
    }
    best.0
}
