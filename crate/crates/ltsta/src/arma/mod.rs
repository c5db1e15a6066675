//! Zero-mean Gaussian ARMA estimation and regression with ARMA errors.
//!
//! Estimation runs in two stages: conditional-sum-of-squares starting
//! values, then exact maximum likelihood through a state-space innovations
//! filter, with the innovation variance concentrated out analytically. The
//! optimizer works in an unconstrained partial-autocorrelation space, so
//! every iterate is causal and invertible by construction. Joint order
//! selection scores Fourier-harmonic counts and ARMA orders together by
//! AICc on the detrended series.

mod css;
mod kalman;
mod optim;
mod transform;

use crate::error::{Error, Result};
use crate::linalg;
use crate::seasonal::{self, SeasonalFit};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Estimated zero-mean ARMA(p,q) process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaFit {
    pub p: usize,
    pub q: usize,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    /// Innovation variance.
    pub sigma2: f64,
    /// Maximized exact Gaussian log-likelihood.
    pub loglik: f64,
    /// AICc at this fit's parameter count (including sigma2).
    pub aicc: f64,
    /// False when the likelihood ascent hit its iteration cap before the
    /// improvement tolerance; the parameters are then the best found.
    pub converged: bool,
}

impl ArmaFit {
    /// Stationary process variance implied by the parameters.
    pub fn process_variance(&self) -> Result<f64> {
        let ss = kalman::StateSpace::new(&self.phi, &self.theta);
        Ok(self.sigma2 * ss.stationary_covariance()?[(0, 0)])
    }
}

/// Regression with ARMA errors: deterministic columns and the error
/// process estimated jointly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegArmaFit {
    pub regressor_coefs: Vec<f64>,
    pub arma: ArmaFit,
    /// One-step innovation estimates, one per observation.
    pub residuals: Vec<f64>,
}

/// Bias-corrected Akaike criterion.
pub fn aicc(loglik: f64, k: usize, n: usize) -> Result<f64> {
    if n <= k + 1 {
        return Err(Error::SampleTooSmall { n, k });
    }
    Ok(-2.0 * loglik + 2.0 * k as f64 * n as f64 / (n as f64 - k as f64 - 1.0))
}

/// Checks that the AR polynomial is causal and the MA polynomial is
/// invertible, both with the root margin used throughout estimation.
pub fn validate_arma_params(phi: &[f64], theta: &[f64]) -> Result<()> {
    transform::validate_params(phi, theta)
}

/// Exact Gaussian log-likelihood of a zero-mean ARMA(p,q) at the given
/// parameters, via the innovations filter.
pub fn gaussian_loglik(z: &[f64], phi: &[f64], theta: &[f64], sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::InvalidParameter {
            name: "sigma2",
            reason: format!("innovation variance must be positive, got {sigma2}"),
        });
    }
    check_finite(z)?;
    transform::validate_params(phi, theta)?;
    let out = kalman::filter(z, phi, theta)?;
    let n = z.len() as f64;
    Ok(-0.5 * (n * (2.0 * PI * sigma2).ln() + out.sum_ln_f + out.sum_v2_over_f / sigma2))
}

/// psi-weights of the causal moving-average representation, psi_0 = 1.
pub fn psi_weights(phi: &[f64], theta: &[f64], count: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(count);
    if count == 0 {
        return psi;
    }
    psi.push(1.0);
    for j in 1..count {
        let mut w = if j <= theta.len() { theta[j - 1] } else { 0.0 };
        for (i, &ph) in phi.iter().enumerate() {
            if j > i {
                w += ph * psi[j - 1 - i];
            }
        }
        psi.push(w);
    }
    psi
}

fn check_finite(z: &[f64]) -> Result<()> {
    for (index, v) in z.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { index });
        }
    }
    Ok(())
}

/// Splits an unconstrained optimizer vector into regression coefficients
/// and ARMA parameters.
struct ParamMap {
    ncols: usize,
    p: usize,
    q: usize,
}

impl ParamMap {
    fn arma(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let ar = self.ncols..self.ncols + self.p;
        let ma = self.ncols + self.p..self.ncols + self.p + self.q;
        let phi = transform::unconstrained_to_ar(&v[ar]);
        let theta = transform::unconstrained_to_ma(&v[ma]);
        (phi, theta)
    }
}

/// Negative log-likelihood with sigma2 concentrated out; infinite at
/// infeasible parameter values so the line search backs away.
fn concentrated_neg_loglik(z: &[f64], phi: &[f64], theta: &[f64]) -> f64 {
    match kalman::filter(z, phi, theta) {
        Ok(out) => {
            let n = z.len() as f64;
            let sigma2 = out.sum_v2_over_f / n;
            if !(sigma2 > 0.0) || !sigma2.is_finite() {
                return f64::INFINITY;
            }
            0.5 * (n * ((2.0 * PI).ln() + 1.0 + sigma2.ln()) + out.sum_ln_f)
        }
        Err(_) => f64::INFINITY,
    }
}

fn subtract_design(y: &[f64], x: &DMatrix<f64>, coefs: &[f64]) -> Vec<f64> {
    if coefs.is_empty() {
        return y.to_vec();
    }
    let fitted = x * DVector::from_column_slice(coefs);
    y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect()
}

/// Evaluates the concentrated variance and exact likelihood at the final
/// parameters, enforcing the variance floor.
fn finalize(
    z: &[f64],
    phi: Vec<f64>,
    theta: Vec<f64>,
    k: usize,
    converged: bool,
    floor_base: f64,
) -> Result<(ArmaFit, kalman::FilterOutput)> {
    transform::validate_params(&phi, &theta)?;
    let out = kalman::filter(z, &phi, &theta)?;
    let n = z.len() as f64;
    let sigma2 = out.sum_v2_over_f / n;
    let floor = 1e-12 * floor_base;
    if !(sigma2 > floor) || !sigma2.is_finite() {
        return Err(Error::DegenerateVariance { sigma2, floor });
    }
    let loglik = -0.5 * (n * (2.0 * PI * sigma2).ln() + out.sum_ln_f + n);
    let aicc_value = if z.len() > k + 1 {
        aicc(loglik, k, z.len())?
    } else {
        f64::INFINITY
    };
    let fit = ArmaFit {
        p: phi.len(),
        q: theta.len(),
        phi,
        theta,
        sigma2,
        loglik,
        aicc: aicc_value,
        converged,
    };
    Ok((fit, out))
}

fn fit_arma_core(z: &[f64], p: usize, q: usize) -> Result<(ArmaFit, kalman::FilterOutput)> {
    check_finite(z)?;
    let n = z.len();
    if n <= p + q + 1 {
        return Err(Error::SeriesTooShort {
            required: p + q + 2,
            actual: n,
        });
    }
    let msz = z.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if msz == 0.0 {
        return Err(Error::DegenerateVariance {
            sigma2: 0.0,
            floor: 0.0,
        });
    }
    if p + q == 0 {
        return finalize(z, vec![], vec![], 1, true, msz);
    }
    let map = ParamMap { ncols: 0, p, q };
    let css_res = optim::minimize(
        |u| {
            let (phi, theta) = map.arma(u);
            css::css(z, &phi, &theta)
        },
        &vec![0.0; p + q],
        500,
        1e-8,
    );
    let mle = optim::minimize(
        |u| {
            let (phi, theta) = map.arma(u);
            concentrated_neg_loglik(z, &phi, &theta)
        },
        &css_res.x,
        500,
        1e-8,
    );
    let (phi, theta) = map.arma(&mle.x);
    finalize(z, phi, theta, p + q + 1, mle.converged, msz)
}

/// Fits a zero-mean ARMA(p,q): CSS starting values, then exact maximum
/// likelihood. A fit that hits the iteration cap is returned with
/// `converged = false` rather than discarded.
pub fn fit_arma(z: &[f64], p: usize, q: usize) -> Result<ArmaFit> {
    fit_arma_core(z, p, q).map(|(fit, _)| fit)
}

/// Joint estimation of deterministic regressor coefficients and ARMA(p,q)
/// errors. Initialization: OLS for the coefficients, CSS on the OLS
/// residuals for the ARMA part, then a joint likelihood ascent over both.
pub fn fit_reg_arma(y: &[f64], x: &DMatrix<f64>, p: usize, q: usize) -> Result<RegArmaFit> {
    check_finite(y)?;
    let n = y.len();
    if x.nrows() != n {
        return Err(Error::LengthMismatch {
            left: "series",
            left_len: n,
            right: "design rows",
            right_len: x.nrows(),
        });
    }
    let ncols = x.ncols();
    let k = ncols + p + q + 1;
    if n <= ncols + p + q + 1 {
        return Err(Error::SampleTooSmall { n, k });
    }
    if ncols == 0 {
        let (arma, out) = fit_arma_core(y, p, q)?;
        return Ok(RegArmaFit {
            regressor_coefs: vec![],
            arma,
            residuals: out.innovations,
        });
    }

    let yv = DVector::from_column_slice(y);
    let beta0 = linalg::lstsq(x, &yv)?;
    let fitted0 = x * &beta0;
    let resid0: Vec<f64> = y.iter().zip(fitted0.iter()).map(|(a, b)| a - b).collect();
    // The collapse floor is measured against the variance of what the ARMA
    // part actually models: the regression residuals. A series the design
    // reproduces exactly is degenerate; a merely well-fit one is not.
    // "Exactly" is judged relative to the series scale, since an exact fit
    // in exact arithmetic still leaves rounding-level residuals.
    let msr = resid0.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let mean = y.iter().sum::<f64>() / n as f64;
    let msy = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if msr <= 1e-20 * msy {
        return Err(Error::DegenerateVariance {
            sigma2: 0.0,
            floor: 0.0,
        });
    }

    let map = ParamMap { ncols, p, q };
    let mut v0: Vec<f64> = beta0.iter().copied().collect();
    if p + q > 0 {
        let inner = ParamMap { ncols: 0, p, q };
        let css_res = optim::minimize(
            |u| {
                let (phi, theta) = inner.arma(u);
                css::css(&resid0, &phi, &theta)
            },
            &vec![0.0; p + q],
            500,
            1e-8,
        );
        v0.extend_from_slice(&css_res.x);
    }

    let res = optim::minimize(
        |v| {
            let (phi, theta) = map.arma(v);
            let z = subtract_design(y, x, &v[..ncols]);
            concentrated_neg_loglik(&z, &phi, &theta)
        },
        &v0,
        500,
        1e-8,
    );
    let coefs = res.x[..ncols].to_vec();
    let (phi, theta) = map.arma(&res.x);
    let z = subtract_design(y, x, &coefs);
    let (arma, out) = finalize(&z, phi, theta, k, res.converged, msr)?;
    Ok(RegArmaFit {
        regressor_coefs: coefs,
        arma,
        residuals: out.innovations,
    })
}

/// Standard errors for a joint fit, from the inverse numerical Hessian of
/// the exact log-likelihood in the natural parameters. Order matches
/// [coefficients.., phi.., theta.., sigma2].
pub fn reg_arma_standard_errors(y: &[f64], x: &DMatrix<f64>, fit: &RegArmaFit) -> Result<Vec<f64>> {
    let ncols = x.ncols();
    let (p, q) = (fit.arma.p, fit.arma.q);
    let d = ncols + p + q + 1;
    let mut xi = Vec::with_capacity(d);
    xi.extend_from_slice(&fit.regressor_coefs);
    xi.extend_from_slice(&fit.arma.phi);
    xi.extend_from_slice(&fit.arma.theta);
    xi.push(fit.arma.sigma2);

    let neg_loglik = |v: &[f64]| -> f64 {
        let sigma2 = v[d - 1];
        if !(sigma2 > 0.0) {
            return f64::INFINITY;
        }
        let z = subtract_design(y, x, &v[..ncols]);
        match kalman::filter(&z, &v[ncols..ncols + p], &v[ncols + p..d - 1]) {
            Ok(out) => {
                let n = y.len() as f64;
                0.5 * (n * (2.0 * PI * sigma2).ln() + out.sum_ln_f + out.sum_v2_over_f / sigma2)
            }
            Err(_) => f64::INFINITY,
        }
    };

    // Central-difference Hessian; sigma2 gets a purely relative step so the
    // probe stays positive, everything else a relative step with a floor.
    let steps: Vec<f64> = xi
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if i == d - 1 {
                1e-4 * v.abs()
            } else {
                (1e-4 * v.abs()).max(1e-5)
            }
        })
        .collect();
    let f0 = neg_loglik(&xi);
    let mut h = DMatrix::zeros(d, d);
    let mut probe = xi.clone();
    for i in 0..d {
        probe[i] = xi[i] + steps[i];
        let fp = neg_loglik(&probe);
        probe[i] = xi[i] - steps[i];
        let fm = neg_loglik(&probe);
        probe[i] = xi[i];
        h[(i, i)] = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
        for j in 0..i {
            probe[i] = xi[i] + steps[i];
            probe[j] = xi[j] + steps[j];
            let fpp = neg_loglik(&probe);
            probe[j] = xi[j] - steps[j];
            let fpm = neg_loglik(&probe);
            probe[i] = xi[i] - steps[i];
            let fmm = neg_loglik(&probe);
            probe[j] = xi[j] + steps[j];
            let fmp = neg_loglik(&probe);
            probe[i] = xi[i];
            probe[j] = xi[j];
            let v = (fpp - fpm - fmp + fmm) / (4.0 * steps[i] * steps[j]);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularHessian);
    }
    let cov = h.try_inverse().ok_or(Error::SingularHessian)?;
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let v = cov[(i, i)];
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::SingularHessian);
        }
        out.push(v.sqrt());
    }
    Ok(out)
}

/// Search caps for joint order selection. `n_max` defaults to the Nyquist
/// cap floor(P/2) and is clamped to it in any case.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderCaps {
    pub n_max: Option<usize>,
    pub p_max: usize,
    pub q_max: usize,
}

impl Default for OrderCaps {
    fn default() -> Self {
        OrderCaps {
            n_max: None,
            p_max: 2,
            q_max: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderScore {
    pub n_harmonics: usize,
    pub p: usize,
    pub q: usize,
    pub aicc: f64,
}

/// Winner of the joint (N, p, q) search plus the full score table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderSelection {
    pub n_harmonics: usize,
    pub p: usize,
    pub q: usize,
    pub fit: RegArmaFit,
    pub seasonal: SeasonalFit,
    pub aicc_table: Vec<OrderScore>,
    /// Combinations that errored or failed to converge, with the reason.
    pub skipped: Vec<String>,
}

/// Exhaustive AICc search over harmonic count and ARMA orders on the
/// detrended series. k counts the Fourier columns, p, q, and sigma2. Ties
/// prefer fewer parameters, then the lexicographically smallest (N, p, q).
/// Combinations that fail to converge are skipped and recorded.
pub fn select_orders(w: &[f64], period: usize, caps: &OrderCaps) -> Result<OrderSelection> {
    let n = w.len();
    let n_cap = caps.n_max.unwrap_or(usize::MAX).min(period / 2);
    // Below this residual variance a fit reproduces the series to machine
    // exactness and likelihood differences are rounding noise; parsimony
    // decides among such fits instead of AICc.
    let mean_w = w.iter().sum::<f64>() / n.max(1) as f64;
    let exact_floor = 1e-20 * w.iter().map(|v| (v - mean_w).powi(2)).sum::<f64>() / n.max(1) as f64;
    let mut best: Option<(usize, usize, usize, usize, RegArmaFit, bool)> = None;
    let mut aicc_table = Vec::new();
    let mut skipped = Vec::new();
    let mut exact_zero: Vec<(usize, usize)> = Vec::new();
    let mut last_err: Option<Error> = None;
    for n_h in 0..=n_cap {
        let design = if n_h == 0 {
            DMatrix::zeros(n, 0)
        } else {
            seasonal::fourier_design(n, period, n_h)?
        };
        for p in 0..=caps.p_max {
            for q in 0..=caps.q_max {
                let k = design.ncols() + p + q + 1;
                match fit_reg_arma(w, &design, p, q) {
                    Ok(fit) if fit.arma.converged => {
                        aicc_table.push(OrderScore {
                            n_harmonics: n_h,
                            p,
                            q,
                            aicc: fit.arma.aicc,
                        });
                        let exact = fit.arma.sigma2 <= exact_floor;
                        let better = match &best {
                            None => true,
                            Some((.., best_k, best_fit, best_exact)) => {
                                if exact != *best_exact {
                                    exact
                                } else if exact {
                                    k < *best_k
                                } else {
                                    let tol = 1e-9 * (1.0 + best_fit.arma.aicc.abs());
                                    fit.arma.aicc < best_fit.arma.aicc - tol
                                        || (fit.arma.aicc <= best_fit.arma.aicc + tol
                                            && k < *best_k)
                                }
                            }
                        };
                        if better {
                            best = Some((n_h, p, q, k, fit, exact));
                        }
                    }
                    Ok(_) => {
                        skipped.push(format!("N={n_h} p={p} q={q}: optimizer did not converge"))
                    }
                    // A residual of exactly zero means this design already
                    // reproduces the series; there is no noise process to
                    // estimate and no likelihood to compare.
                    Err(Error::DegenerateVariance { sigma2, floor })
                        if sigma2 == 0.0 && floor == 0.0 =>
                    {
                        exact_zero.push((n_h, k));
                    }
                    Err(e) => {
                        skipped.push(format!("N={n_h} p={p} q={q}: {e}"));
                        last_err = Some(e);
                    }
                }
            }
        }
    }
    // When some design is a perfect reproduction, the smallest such design
    // wins outright with a degenerate noise part (sigma2 = 0, loglik and
    // AICc reported as 0; they are not comparable to regular fits).
    if let Some(&(n_h, _)) = exact_zero.iter().min_by_key(|c| c.1) {
        let (coefs, residuals, seasonal) = if n_h == 0 {
            (vec![], w.to_vec(), SeasonalFit::zero(period))
        } else {
            let design = seasonal::fourier_design(n, period, n_h)?;
            let beta = linalg::lstsq(&design, &DVector::from_column_slice(w))?;
            let fitted = &design * &beta;
            let residuals: Vec<f64> = w.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
            let coefs: Vec<f64> = beta.iter().copied().collect();
            let seasonal = SeasonalFit::from_design_coefficients(period, n_h, &coefs)?;
            (coefs, residuals, seasonal)
        };
        return Ok(OrderSelection {
            n_harmonics: n_h,
            p: 0,
            q: 0,
            fit: RegArmaFit {
                regressor_coefs: coefs,
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
            },
            seasonal,
            aicc_table,
            skipped,
        });
    }
    match best {
        Some((n_harmonics, p, q, _, fit, _)) => {
            let seasonal = if n_harmonics == 0 {
                SeasonalFit::zero(period)
            } else {
                SeasonalFit::from_design_coefficients(period, n_harmonics, &fit.regressor_coefs)?
            };
            Ok(OrderSelection {
                n_harmonics,
                p,
                q,
                fit,
                seasonal,
                aicc_table,
                skipped,
            })
        }
        None => Err(last_err.unwrap_or(Error::InvalidParameter {
            name: "order_search",
            reason: "no candidate order produced a usable fit".into(),
        })),
    }
}

/// Conditional forecasts of the ARMA process given its history, with
/// variances accumulated from the psi-weights:
/// Var(h) = sigma2 * sum_{j<h} psi_j^2.
pub fn forecast_arma(
    fit: &ArmaFit,
    history: &[f64],
    horizon: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    transform::validate_params(&fit.phi, &fit.theta)?;
    if horizon == 0 {
        return Ok((vec![], vec![]));
    }
    let points = if history.is_empty() {
        vec![0.0; horizon]
    } else {
        check_finite(history)?;
        let out = kalman::filter(history, &fit.phi, &fit.theta)?;
        let mut state = out.predicted_state;
        let mut pts = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            pts.push(state[0]);
            state = &out.state_space.t_mat * state;
        }
        pts
    };
    let psi = psi_weights(&fit.phi, &fit.theta, horizon);
    let mut acc = 0.0;
    let variances = psi
        .iter()
        .map(|w| {
            acc += w * w;
            fit.sigma2 * acc
        })
        .collect();
    Ok((points, variances))
}
