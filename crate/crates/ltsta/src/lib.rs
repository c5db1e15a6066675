//! Trend-stationary time-series decomposition.
//!
//! Decomposes a univariate series into a continuity-constrained
//! piecewise-linear trend, trigonometric (Fourier) seasonality, and a
//! zero-mean ARMA error process:
//!
//! ```text
//! y_t = T_t + S_t + Z_t
//! ```
//!
//! Breakpoints in the trend are located by a dynamic-programming search
//! over candidate segmentations, the number of breaks is chosen from the
//! SSR-vs-breaks curve (L-method knee, improvement-ratio and
//! absolute-improvement thresholds), and the final model is estimated
//! jointly by exact Gaussian maximum likelihood with the deterministic
//! regressors. Forecasts extrapolate the last trend regime, repeat the
//! seasonal pattern, and propagate the ARMA process with conditional
//! intervals.

pub mod arma;
pub mod diagnostics;
pub mod error;
mod linalg;
pub mod metrics;
pub mod model;
pub mod seasonal;
pub mod selection;
pub mod series;
pub mod simulate;
pub mod trend;

pub use error::{Error, Result};
pub use model::{ForecastResult, LtstaConfig, LtstaModel};
pub use series::{TimeSeries, Transform, TransformKind};
