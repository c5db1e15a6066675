//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("value at index {index} is {value}, but the transform requires strictly positive input")]
    NonPositiveValue { index: usize, value: f64 },

    #[error("inverse transform undefined at index {index}: argument {value} leaves the domain")]
    InversionDomain { index: usize, value: f64 },

    #[error("series has {actual} observations, need at least {required}")]
    SeriesTooShort { required: usize, actual: usize },

    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },

    #[error("period must be >= 1, got {period}")]
    InvalidPeriod { period: usize },

    #[error("label '{label}' advances {cycle} steps per cycle, inconsistent with period {period}")]
    LabelMismatch {
        label: String,
        cycle: usize,
        period: usize,
    },

    #[error("cannot parse '{text}' as a series label")]
    BadLabel { text: String },

    #[error("invalid segmentation: {reason}")]
    InvalidSegmentation { reason: String },

    #[error("design matrix is rank deficient (smallest/largest singular value {ratio:.3e} below tolerance)")]
    RankDeficient { ratio: f64 },

    #[error("window [{start}, {end}] holds {len} points, single-break search needs at least {required}")]
    WindowTooShort {
        start: usize,
        end: usize,
        len: usize,
        required: usize,
    },

    #[error("break budget infeasible: n = {n} < (m_max + 1) * h = {required}")]
    BudgetInfeasible { n: usize, required: usize },

    #[error("SSR curve reaches zero at k = {k}; improvement ratios are undefined past a perfect fit")]
    ZeroSsr { k: usize },

    #[error("SSR curve has {actual} points, need at least {required}")]
    CurveTooShort { required: usize, actual: usize },

    #[error("harmonic count {n_harmonics} outside [1, {max}] for period {period}")]
    HarmonicsOutOfRange {
        n_harmonics: usize,
        period: usize,
        max: usize,
    },

    #[error("parameters are not {property}: {reason}")]
    NonStationaryParams {
        property: &'static str,
        reason: String,
    },

    #[error("innovation variance {sigma2:.3e} collapsed below {floor:.3e}")]
    DegenerateVariance { sigma2: f64, floor: f64 },

    #[error("likelihood Hessian is singular or not positive definite; standard errors unavailable")]
    SingularHessian,

    #[error("sample size {n} too small for {k} parameters")]
    SampleTooSmall { n: usize, k: usize },

    #[error("need at least {required} residuals for diagnostics, got {actual}")]
    TooFewResiduals { required: usize, actual: usize },

    #[error("scaled-error denominator is zero: training series is exactly periodic")]
    ZeroDenominator,

    #[error("{left} has length {left_len} but {right} has length {right_len}")]
    LengthMismatch {
        left: &'static str,
        left_len: usize,
        right: &'static str,
        right_len: usize,
    },

    #[error("invalid parameter '{name}': {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    /// True for errors caused by bad input rather than by numerical failure
    /// during estimation. The CLI maps the former to exit code 1 and the
    /// latter to exit code 2.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::RankDeficient { .. }
                | Error::DegenerateVariance { .. }
                | Error::NonStationaryParams { .. }
                | Error::SingularHessian
        )
    }
}
