//! Break-count selection from the cost-vs-breaks curve.
//!
//! The curve hands over one cost value per break count k = 0..m_max
//! (SSR by default, sum of absolute residuals in robust mode). Selection
//! combines an L-method knee estimate with improvement thresholds: the
//! mean improvement ratio, and the mean absolute improvement taken over
//! the counts past the knee. A count is kept while its improvement clears
//! the threshold; the chosen m is the last acceptable count before the
//! first rejected one.

use crate::error::{Error, Result};
use crate::linalg;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Which improvement rule picks m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Take the L-method knee directly.
    LMethod,
    /// Relative improvement ratios against their mean.
    Ratio,
    /// Absolute improvements past the knee against their mean.
    Absolute,
}

impl std::str::FromStr for SelectionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l_method" => Ok(SelectionPolicy::LMethod),
            "ratio" => Ok(SelectionPolicy::Ratio),
            "absolute" => Ok(SelectionPolicy::Absolute),
            _ => Err(Error::InvalidParameter {
                name: "policy",
                reason: format!("unknown selection policy '{s}'"),
            }),
        }
    }
}

/// How the reported m was actually determined. Differs from the requested
/// policy when a degenerate curve forces a fallback, and is `Manual` when
/// the caller fixed m directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    LMethod,
    Ratio,
    Absolute,
    Manual,
}

/// Everything the selection run looked at, serialized by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    /// Cost per break count, k = 0..m_max, as handed in.
    pub ssr_curve: Vec<f64>,
    /// L-method knee.
    pub m_l: usize,
    /// Improvement ratios r_k = 1 - cost_k / cost_{k-1}, k = 1..m_max.
    pub ratios: Vec<f64>,
    /// Absolute improvements d_k = cost_{k-1} - cost_k for k past the knee.
    pub diffs: Vec<f64>,
    /// Mean of all ratios.
    pub tau_r: f64,
    /// Mean of the post-knee absolute improvements; absent when the knee
    /// leaves no counts to average.
    pub tau_d: Option<f64>,
    pub m_selected: usize,
    pub method: SelectionMethod,
    pub warnings: Vec<String>,
}

/// Improvement ratios r_k = 1 - cost_k / cost_{k-1} for k = 1..m_max.
///
/// A zero cost cannot serve as a denominator: the fit is already perfect
/// and later counts have nothing to improve on.
pub fn improvement_ratios(ssr_curve: &[f64]) -> Result<Vec<f64>> {
    if ssr_curve.len() < 2 {
        return Err(Error::CurveTooShort {
            required: 2,
            actual: ssr_curve.len(),
        });
    }
    let mut out = Vec::with_capacity(ssr_curve.len() - 1);
    for i in 1..ssr_curve.len() {
        let prev = ssr_curve[i - 1];
        if prev == 0.0 {
            return Err(Error::ZeroSsr { k: i - 1 });
        }
        out.push(1.0 - ssr_curve[i] / prev);
    }
    Ok(out)
}

/// Absolute improvements d_k = cost_{k-1} - cost_k for k = m_l+1..m_max.
pub fn absolute_improvements(ssr_curve: &[f64], m_l: usize) -> Result<Vec<f64>> {
    let m_max = ssr_curve.len().saturating_sub(1);
    if m_l >= m_max {
        return Err(Error::InvalidParameter {
            name: "m_l",
            reason: format!("knee {m_l} leaves no counts below m_max = {m_max}"),
        });
    }
    Ok((m_l + 1..=m_max)
        .map(|k| ssr_curve[k - 1] - ssr_curve[k])
        .collect())
}

/// L-method knee: over candidate knees k_c, fit two lines joined at
/// (k_c, cost_{k_c}), one through the counts up to k_c and one through the
/// counts from k_c on, and return the k_c whose joint fit has the smallest
/// SSR. Each segment needs two points, so k_c ranges over 1..=m_max-2 and
/// the curve must hold at least four points. Ties go to the smallest k_c.
pub fn l_method(ssr_curve: &[f64]) -> Result<usize> {
    l_method_detail(ssr_curve).map(|d| d.0)
}

/// Knee plus a degeneracy flag: true when every candidate ties, which is
/// what a perfectly straight curve produces.
fn l_method_detail(ssr_curve: &[f64]) -> Result<(usize, bool)> {
    let len = ssr_curve.len();
    if len < 4 {
        return Err(Error::CurveTooShort {
            required: 4,
            actual: len,
        });
    }
    let m_max = len - 1;
    let y = DVector::from_iterator(len, ssr_curve.iter().copied());
    let mut best: Option<(usize, f64)> = None;
    let mut all_tied = true;
    for knee in 1..=m_max - 2 {
        // Joint continuous two-segment fit: slope change enters through a
        // hinge column, so the segments share their value at the knee.
        let mut x = DMatrix::zeros(len, 3);
        for (row, k) in (0..len).enumerate() {
            x[(row, 0)] = 1.0;
            x[(row, 1)] = k as f64;
            x[(row, 2)] = (k as f64 - knee as f64).max(0.0);
        }
        let beta = linalg::lstsq(&x, &y)?;
        let ssr = linalg::residual_ssr(&x, &y, &beta);
        match best {
            None => best = Some((knee, ssr)),
            Some((_, best_ssr)) => {
                let tol = 1e-12 * (1.0 + best_ssr.abs());
                if ssr < best_ssr - tol {
                    best = Some((knee, ssr));
                    all_tied = false;
                } else if ssr > best_ssr + tol {
                    all_tied = false;
                }
            }
        }
    }
    let (knee, _) = best.expect("candidate range is nonempty for len >= 4");
    Ok((knee, all_tied))
}

/// Applies a selection policy to the cost curve and reports the chosen m
/// together with every intermediate quantity.
///
/// Scanning k = 1 upward, a count is acceptable while its improvement
/// metric is at least the corresponding mean threshold; m is the last
/// acceptable count before the first rejected one. The absolute policy
/// starts its scan just past the knee, so the knee itself is the floor.
/// Degenerate inputs (perfect fits, curves too short for a knee) fall back
/// to the ratio rule and say so in the warnings.
pub fn select_num_breaks(ssr_curve: &[f64], policy: SelectionPolicy) -> Result<SelectionReport> {
    if ssr_curve.is_empty() {
        return Err(Error::CurveTooShort {
            required: 2,
            actual: 0,
        });
    }
    let mut warnings = Vec::new();

    // A zero cost ends the curve: nothing past a perfect fit can improve.
    let effective = match ssr_curve.iter().position(|&v| v == 0.0) {
        Some(0) => {
            warnings.push("zero-break fit is already perfect; selected m = 0".into());
            return Ok(SelectionReport {
                ssr_curve: ssr_curve.to_vec(),
                m_l: 0,
                ratios: vec![],
                diffs: vec![],
                tau_r: 0.0,
                tau_d: None,
                m_selected: 0,
                method: SelectionMethod::Ratio,
                warnings,
            });
        }
        Some(z) => {
            warnings.push(format!(
                "perfect fit reached at k = {z}; counts beyond it were ignored"
            ));
            &ssr_curve[..=z]
        }
        None => ssr_curve,
    };

    let ratios = improvement_ratios(effective)?;
    let tau_r = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let m_max = effective.len() - 1;

    let knee = match l_method_detail(effective) {
        Ok((knee, degenerate)) => {
            if degenerate {
                warnings.push("cost curve is straight; L-method knee is degenerate".into());
            }
            Some(knee)
        }
        Err(Error::CurveTooShort { .. }) => None,
        Err(e) => return Err(e),
    };

    let (diffs, tau_d) = match knee {
        Some(m_l) if m_l < m_max => {
            let d = absolute_improvements(effective, m_l)?;
            let tau = d.iter().sum::<f64>() / d.len() as f64;
            (d, Some(tau))
        }
        _ => (vec![], None),
    };

    let mut method = match policy {
        SelectionPolicy::LMethod => SelectionMethod::LMethod,
        SelectionPolicy::Ratio => SelectionMethod::Ratio,
        SelectionPolicy::Absolute => SelectionMethod::Absolute,
    };
    // The knee-dependent policies need a knee to exist.
    if knee.is_none() && method != SelectionMethod::Ratio {
        warnings.push(
            "cost curve too short for the L-method; fell back to the ratio policy".into(),
        );
        method = SelectionMethod::Ratio;
    }
    if method == SelectionMethod::Absolute && tau_d.is_none() {
        warnings.push(
            "no counts past the knee to average; fell back to the ratio policy".into(),
        );
        method = SelectionMethod::Ratio;
    }

    let mut m_selected = match method {
        SelectionMethod::LMethod => knee.unwrap(),
        SelectionMethod::Ratio => {
            let m = scan(&ratios, tau_r, 0);
            if m == m_max && m_max >= 1 {
                warnings.push("no count was rejected under the ratio rule".into());
            }
            m
        }
        SelectionMethod::Absolute => {
            let m_l = knee.unwrap();
            let m = scan(&diffs, tau_d.unwrap(), m_l);
            if m == m_max {
                warnings.push("no count was rejected under the absolute rule".into());
            }
            m
        }
        SelectionMethod::Manual => unreachable!("manual reports are built separately"),
    };

    // Guard: the chosen count never sits on an uptick of the curve.
    while m_selected > 0 && effective[m_selected] > effective[m_selected - 1] {
        warnings.push(format!(
            "cost rises at k = {m_selected}; stepped back to {}",
            m_selected - 1
        ));
        m_selected -= 1;
    }

    Ok(SelectionReport {
        ssr_curve: ssr_curve.to_vec(),
        m_l: knee.unwrap_or(0),
        ratios,
        diffs,
        tau_r,
        tau_d,
        m_selected,
        method,
        warnings,
    })
}

/// Walks the metric values, which cover counts floor+1..=floor+metrics.len(),
/// and returns the last acceptable count before the first rejected one.
fn scan(metrics: &[f64], threshold: f64, floor: usize) -> usize {
    let mut m = floor;
    for (offset, &value) in metrics.iter().enumerate() {
        if value >= threshold {
            m = floor + offset + 1;
        } else {
            break;
        }
    }
    m
}

/// Report for a caller-imposed break count: thresholds and the knee are
/// still computed for context where the curve allows it.
pub fn manual_report(ssr_curve: &[f64], m: usize) -> Result<SelectionReport> {
    let m_max = ssr_curve.len().saturating_sub(1);
    if m > m_max {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: format!("requested {m} breaks but the curve stops at {m_max}"),
        });
    }
    let mut report = match select_num_breaks(ssr_curve, SelectionPolicy::Ratio) {
        Ok(r) => r,
        Err(_) => SelectionReport {
            ssr_curve: ssr_curve.to_vec(),
            m_l: 0,
            ratios: vec![],
            diffs: vec![],
            tau_r: 0.0,
            tau_d: None,
            m_selected: 0,
            method: SelectionMethod::Manual,
            warnings: vec![],
        },
    };
    report.m_selected = m;
    report.method = SelectionMethod::Manual;
    Ok(report)
}

/// Default break budget by series length, clamped so the dynamic program
/// stays feasible: every regime needs h points and the no-break fit needs
/// two.
pub fn default_m_max(n: usize, h: usize) -> usize {
    let by_length = if n < 120 {
        10
    } else if n < 360 {
        20
    } else {
        30
    };
    let spacing_cap = (n / h).saturating_sub(1);
    let dof_cap = n.saturating_sub(2);
    by_length.min(spacing_cap).min(dof_cap).max(1)
}
