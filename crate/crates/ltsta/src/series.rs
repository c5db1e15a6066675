//! Series representation, calendar labels, and invertible pre-transforms.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Family of a [`Transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Identity,
    Log,
    BoxCox,
}

/// Invertible elementwise pre-transform applied before modeling.
///
/// `lambda` is only meaningful for the Box-Cox family; `box_cox(0)` is the
/// log transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub kind: TransformKind,
    pub lambda: f64,
}

impl Transform {
    pub fn identity() -> Self {
        Transform {
            kind: TransformKind::Identity,
            lambda: 0.0,
        }
    }

    pub fn log() -> Self {
        Transform {
            kind: TransformKind::Log,
            lambda: 0.0,
        }
    }

    pub fn box_cox(lambda: f64) -> Self {
        Transform {
            kind: TransformKind::BoxCox,
            lambda,
        }
    }

    /// Transforms every value. Log and Box-Cox require strictly positive
    /// input.
    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            TransformKind::Identity => Ok(values.to_vec()),
            TransformKind::Log => self.map_positive(values, f64::ln),
            TransformKind::BoxCox => {
                let lambda = self.lambda;
                if lambda == 0.0 {
                    self.map_positive(values, f64::ln)
                } else {
                    // (y^l - 1)/l computed as expm1(l ln y)/l: exact for
                    // small l where the naive form cancels.
                    self.map_positive(values, |y| f64::exp_m1(lambda * y.ln()) / lambda)
                }
            }
        }
    }

    /// Inverts [`Transform::apply`]; round-trips within 1e-10 relative.
    pub fn invert(&self, values: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            TransformKind::Identity => Ok(values.to_vec()),
            TransformKind::Log => Ok(values.iter().map(|&x| x.exp()).collect()),
            TransformKind::BoxCox => {
                let lambda = self.lambda;
                if lambda == 0.0 {
                    return Ok(values.iter().map(|&x| x.exp()).collect());
                }
                values
                    .iter()
                    .enumerate()
                    .map(|(index, &x)| {
                        // y = (1 + l x)^(1/l), defined while 1 + l x > 0.
                        if 1.0 + lambda * x <= 0.0 {
                            Err(Error::InversionDomain { index, value: x })
                        } else {
                            Ok((f64::ln_1p(lambda * x) / lambda).exp())
                        }
                    })
                    .collect()
            }
        }
    }

    /// Inverts a single value, saturating at the image boundary instead of
    /// erroring. Used for interval bounds, where an out-of-domain argument
    /// means the bound lies below everything the transform can produce.
    pub fn invert_saturating(&self, x: f64) -> f64 {
        match self.kind {
            TransformKind::Identity => x,
            TransformKind::Log => x.exp(),
            TransformKind::BoxCox => {
                let lambda = self.lambda;
                if lambda == 0.0 {
                    x.exp()
                } else if 1.0 + lambda * x <= 0.0 {
                    if lambda > 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    (f64::ln_1p(lambda * x) / lambda).exp()
                }
            }
        }
    }

    fn map_positive(&self, values: &[f64], f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        values
            .iter()
            .enumerate()
            .map(|(index, &y)| {
                if y <= 0.0 {
                    Err(Error::NonPositiveValue { index, value: y })
                } else {
                    Ok(f(y))
                }
            })
            .collect()
    }
}

/// Calendar position of the first observation. Advances one step per
/// observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    /// e.g. "2002Q1"
    Quarter { year: i32, quarter: u8 },
    /// e.g. "2002-04" or "2002M4"
    Month { year: i32, month: u8 },
    /// plain integer index
    Index { origin: i64 },
}

impl Label {
    /// Observations per natural calendar cycle, if the label has one.
    pub fn cycle(&self) -> Option<usize> {
        match self {
            Label::Quarter { .. } => Some(4),
            Label::Month { .. } => Some(12),
            Label::Index { .. } => None,
        }
    }

    /// Label `steps` observations after this one.
    pub fn advance(&self, steps: usize) -> Label {
        let steps = steps as i64;
        match *self {
            Label::Quarter { year, quarter } => {
                let total = year as i64 * 4 + (quarter as i64 - 1) + steps;
                Label::Quarter {
                    year: total.div_euclid(4) as i32,
                    quarter: (total.rem_euclid(4) + 1) as u8,
                }
            }
            Label::Month { year, month } => {
                let total = year as i64 * 12 + (month as i64 - 1) + steps;
                Label::Month {
                    year: total.div_euclid(12) as i32,
                    month: (total.rem_euclid(12) + 1) as u8,
                }
            }
            Label::Index { origin } => Label::Index {
                origin: origin + steps,
            },
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Quarter { year, quarter } => write!(f, "{year}Q{quarter}"),
            Label::Month { year, month } => write!(f, "{year}-{month:02}"),
            Label::Index { origin } => write!(f, "{origin}"),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Label> {
        let bad = || Error::BadLabel {
            text: s.to_string(),
        };
        if let Some((y, q)) = split_once_ci(s, 'Q') {
            let year: i32 = y.trim().parse().map_err(|_| bad())?;
            let quarter: u8 = q.trim().parse().map_err(|_| bad())?;
            if (1..=4).contains(&quarter) {
                return Ok(Label::Quarter { year, quarter });
            }
            return Err(bad());
        }
        if let Some((y, m)) = split_once_ci(s, 'M').or_else(|| s.split_once('-')) {
            let year: i32 = y.trim().parse().map_err(|_| bad())?;
            let month: u8 = m.trim().parse().map_err(|_| bad())?;
            if (1..=12).contains(&month) {
                return Ok(Label::Month { year, month });
            }
            return Err(bad());
        }
        if let Ok(origin) = s.trim().parse::<i64>() {
            return Ok(Label::Index { origin });
        }
        Err(bad())
    }
}

fn split_once_ci(s: &str, sep: char) -> Option<(&str, &str)> {
    s.split_once(sep)
        .or_else(|| s.split_once(sep.to_ascii_lowercase()))
}

/// Ordered observations with period metadata and an optional start label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    period: usize,
    start: Option<Label>,
}

impl TimeSeries {
    /// Validates and wraps raw observations.
    ///
    /// `period` is the number of observations per seasonal cycle (1 for
    /// nonseasonal data). A quarterly or monthly start label must agree
    /// with the period unless the series is nonseasonal.
    pub fn new(values: Vec<f64>, period: usize, start: Option<Label>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::SeriesTooShort {
                required: 1,
                actual: 0,
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        if period == 0 {
            return Err(Error::InvalidPeriod { period });
        }
        if let Some(label) = &start {
            if let Some(cycle) = label.cycle() {
                if period != 1 && period != cycle {
                    return Err(Error::LabelMismatch {
                        label: label.to_string(),
                        cycle,
                        period,
                    });
                }
            }
        }
        Ok(TimeSeries {
            values,
            period,
            start,
        })
    }

    /// Parses the start label from text, when one is present.
    pub fn with_start_text(values: Vec<f64>, period: usize, start: Option<&str>) -> Result<Self> {
        let start = start.map(Label::from_str).transpose()?;
        TimeSeries::new(values, period, start)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn start(&self) -> Option<Label> {
        self.start
    }

    /// Label for 1-based time index `t`; valid past the end of the sample,
    /// which is how forecast rows are labeled.
    pub fn label_at(&self, t: usize) -> String {
        match &self.start {
            Some(label) => label.advance(t - 1).to_string(),
            None => t.to_string(),
        }
    }

    /// Same metadata, new values of equal length.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::LengthMismatch {
                left: "values",
                left_len: values.len(),
                right: "series",
                right_len: self.values.len(),
            });
        }
        TimeSeries::new(values, self.period, self.start)
    }
}

/// Applies `transform` elementwise, keeping period and labels.
pub fn apply_transform(series: &TimeSeries, transform: &Transform) -> Result<TimeSeries> {
    series.with_values(transform.apply(series.values())?)
}

/// Undoes [`apply_transform`], keeping period and labels.
pub fn invert_transform(series: &TimeSeries, transform: &Transform) -> Result<TimeSeries> {
    series.with_values(transform.invert(series.values())?)
}
