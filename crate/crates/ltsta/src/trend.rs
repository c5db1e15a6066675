//! Continuity-constrained piecewise-linear trend fitting.
//!
//! A trend with breaks at c_1 < .. < c_m is a connected piecewise line:
//! each regime has its own slope, and adjacent regimes meet at the break.
//! The constraint is folded into a hinge basis, so every candidate
//! segmentation reduces to one ordinary least-squares problem. Multi-break
//! search combines an exhaustive single-break scan with a dynamic program
//! over split points, then re-fits the assembled break sets so reported
//! SSRs always refer to the full constrained model.

use crate::error::{Error, Result};
use crate::linalg;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

/// Largest series length at which every dynamic-program cell re-ranks its
/// candidates by exact constrained SSR instead of the additive score.
const EXACT_RERANK_LIMIT: usize = 150;

/// In additive mode, how many top-scored candidates per break count are
/// re-fit exactly when assembling the final table.
const TOP_ADDITIVE_KEEP: usize = 24;

/// Largest total number of candidate refits at which the multi-break
/// search enumerates every admissible break vector instead of running
/// the dynamic program. Within this budget the reported optima are exact.
const ENUMERATION_BUDGET: u128 = 400_000;

/// Relative slack under which two SSRs count as tied; ties go to the
/// lexicographically smallest break vector.
const TIE_EPS: f64 = 1e-12;

/// Break positions c_1 < .. < c_m (1-based time indices, each the last
/// index of its regime) together with the minimum segment length h.
///
/// Virtual endpoints c_0 = 0 and c_{m+1} = n take part in the spacing
/// rule: every regime, including the first and last, spans at least h
/// observations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    breaks: Vec<usize>,
    h: usize,
}

impl Segmentation {
    /// Validates ordering and inter-break spacing. Spacing against the
    /// series end is checked by [`Segmentation::validate_for`] once n is
    /// known.
    pub fn new(breaks: Vec<usize>, h: usize) -> Result<Self> {
        if h < 1 {
            return Err(Error::InvalidParameter {
                name: "h",
                reason: "minimum segment length must be at least 1".into(),
            });
        }
        let mut prev = 0usize;
        for &c in &breaks {
            if c < prev + h {
                return Err(Error::InvalidSegmentation {
                    reason: format!("break {c} is closer than h = {h} to its predecessor {prev}"),
                });
            }
            prev = c;
        }
        Ok(Segmentation { breaks, h })
    }

    /// The no-break segmentation.
    pub fn none(h: usize) -> Self {
        Segmentation { breaks: vec![], h }
    }

    pub fn breaks(&self) -> &[usize] {
        &self.breaks
    }

    /// Break count m.
    pub fn m(&self) -> usize {
        self.breaks.len()
    }

    pub fn h(&self) -> usize {
        self.h
    }

    /// Checks the last regime's length against a series of length n.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        if let Some(&last) = self.breaks.last() {
            if last + self.h > n {
                return Err(Error::InvalidSegmentation {
                    reason: format!(
                        "last break {last} leaves fewer than h = {} points before n = {n}",
                        self.h
                    ),
                });
            }
        } else if n == 0 {
            return Err(Error::InvalidSegmentation {
                reason: "empty series".into(),
            });
        }
        Ok(())
    }
}

/// Fitted continuity-constrained piecewise-linear trend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendFit {
    pub segmentation: Segmentation,
    /// Intercept of the first regime.
    pub beta0_first: f64,
    /// Per-regime slopes, one more than the break count.
    pub slopes: Vec<f64>,
    /// Residual sum of squares against the series the fit was computed on.
    pub ssr: f64,
}

impl TrendFit {
    /// Per-regime intercepts implied by continuity: each regime's line
    /// passes through the previous regime's value at the shared break.
    pub fn intercepts(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.slopes.len());
        let mut intercept = self.beta0_first;
        out.push(intercept);
        for (i, &c) in self.segmentation.breaks().iter().enumerate() {
            intercept += (self.slopes[i] - self.slopes[i + 1]) * c as f64;
            out.push(intercept);
        }
        out
    }

    /// Trend value at 1-based time t; t past the sample extends the last
    /// regime's line.
    pub fn value_at(&self, t: usize) -> f64 {
        let mut acc = self.beta0_first;
        let mut prev = 0usize;
        for (i, &slope) in self.slopes.iter().enumerate() {
            let upper = self.segmentation.breaks().get(i).copied();
            let span = match upper {
                Some(c) => t.min(c).saturating_sub(prev),
                None => t.saturating_sub(prev),
            };
            acc += slope * span as f64;
            if let Some(c) = upper {
                prev = c;
            }
        }
        acc
    }

    /// Trend values over an inclusive 1-based index range.
    pub fn values(&self, t_from: usize, t_to: usize) -> Vec<f64> {
        (t_from..=t_to).map(|t| self.value_at(t)).collect()
    }
}

/// Hinge-basis design matrix for a segmentation: column 1 is all ones,
/// column 2 is min(t, c_1), and column 2+i is max(0, min(t, c_{i+1}) - c_i)
/// with c_{m+1} = n. Regressing y on it yields the first intercept followed
/// by the per-regime slopes.
pub fn build_design_matrix(n: usize, segmentation: &Segmentation) -> Result<DMatrix<f64>> {
    segmentation.validate_for(n)?;
    let m = segmentation.m();
    let breaks = segmentation.breaks();
    let mut x = DMatrix::zeros(n, m + 2);
    for t in 1..=n {
        let row = t - 1;
        x[(row, 0)] = 1.0;
        let mut prev = 0usize;
        for i in 0..=m {
            let upper = breaks.get(i).copied().unwrap_or(n);
            let span = t.min(upper).saturating_sub(prev);
            x[(row, i + 1)] = span as f64;
            prev = upper;
        }
    }
    Ok(x)
}

/// Least-squares fit of the constrained piecewise line with the given
/// breaks. The solve runs through an orthogonal decomposition; a design
/// whose smallest singular value falls below 1e-10 of the largest is
/// rejected as rank deficient.
pub fn fit_ols(y: &[f64], segmentation: &Segmentation) -> Result<TrendFit> {
    let n = y.len();
    let m = segmentation.m();
    if n < m + 2 {
        return Err(Error::SeriesTooShort {
            required: m + 2,
            actual: n,
        });
    }
    let x = build_design_matrix(n, segmentation)?;
    let yv = DVector::from_column_slice(y);
    let beta = linalg::lstsq(&x, &yv)?;
    let ssr = linalg::residual_ssr(&x, &yv, &beta);
    Ok(TrendFit {
        segmentation: segmentation.clone(),
        beta0_first: beta[0],
        slopes: beta.iter().skip(1).copied().collect(),
        ssr,
    })
}

/// SSR of a single unbroken line on the window [a, b] (1-based inclusive).
fn line_ssr(y: &[f64], a: usize, b: usize) -> Result<f64> {
    if b - a + 1 == 1 {
        return Ok(0.0);
    }
    let fit = fit_ols(&y[a - 1..b], &Segmentation::none(1))?;
    Ok(fit.ssr)
}

/// Exhaustive single-break search on the window [i, j] (1-based
/// inclusive): fits the one-break constrained model at every admissible
/// break c in [i+h-1, j-h] and returns the global index and SSR of the
/// best, smallest c on ties.
pub fn grid_search_single_break(
    y: &[f64],
    i: usize,
    j: usize,
    h: usize,
) -> Result<(usize, f64)> {
    let n = y.len();
    if i < 1 || j > n || j <= i {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: format!("window [{i}, {j}] out of range for n = {n}"),
        });
    }
    let len = j - i + 1;
    // Three parameters need three observations even when 2h is smaller.
    let required = (2 * h).max(3);
    if len < required {
        return Err(Error::WindowTooShort {
            start: i,
            end: j,
            len,
            required,
        });
    }
    let window = &y[i - 1..j];
    let mut best: Option<(usize, f64)> = None;
    for c in (i + h - 1)..=(j - h) {
        let local = c - i + 1;
        let seg = Segmentation::new(vec![local], h)?;
        // A window-local break at t = 1 duplicates the intercept column;
        // such a candidate describes no extra function and is dropped.
        let ssr = match fit_ols(window, &seg) {
            Ok(fit) => fit.ssr,
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        };
        let replace = match best {
            None => true,
            Some((_, best_ssr)) => ssr < best_ssr - TIE_EPS * (1.0 + best_ssr.abs()),
        };
        if replace {
            best = Some((c, ssr));
        }
    }
    best.ok_or_else(|| Error::InvalidSegmentation {
        reason: format!("no identifiable single-break fit on window [{i}, {j}]"),
    })
}

/// Output of [`dp_segment`]: per break count k, the best segmentation found
/// and its exact constrained SSR, plus the memoized single-break table the
/// recursion consulted.
#[derive(Debug, Clone)]
pub struct SsrTable {
    best_by_k: Vec<(Segmentation, f64)>,
    single_break_ssr: HashMap<(usize, usize), (usize, f64)>,
    warnings: Vec<String>,
}

impl SsrTable {
    /// Best segmentation and SSR for exactly k breaks.
    pub fn best(&self, k: usize) -> (&Segmentation, f64) {
        let (seg, ssr) = &self.best_by_k[k];
        (seg, *ssr)
    }

    /// Largest break count in the table.
    pub fn m_max(&self) -> usize {
        self.best_by_k.len() - 1
    }

    /// SSR per break count, k = 0..m_max.
    pub fn ssr_curve(&self) -> Vec<f64> {
        self.best_by_k.iter().map(|(_, ssr)| *ssr).collect()
    }

    /// Memoized single-break results: window (start, end) to (break, SSR).
    /// Empty when the table came from the exhaustive small-problem path,
    /// which consults no windows.
    pub fn single_break_ssr(&self) -> &HashMap<(usize, usize), (usize, f64)> {
        &self.single_break_ssr
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Sum of absolute residuals of the best fit per break count,
    /// the robust alternative cost curve for break selection.
    pub fn sar_curve(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.best_by_k
            .iter()
            .map(|(seg, _)| {
                let fit = fit_ols(y, seg)?;
                Ok(y.iter()
                    .enumerate()
                    .map(|(idx, &v)| (v - fit.value_at(idx + 1)).abs())
                    .sum())
            })
            .collect()
    }
}

struct Memo<'a> {
    y: &'a [f64],
    h: usize,
    singles: HashMap<(usize, usize), (usize, f64)>,
    lines: HashMap<(usize, usize), f64>,
}

impl Memo<'_> {
    fn single(&mut self, a: usize, b: usize) -> Result<(usize, f64)> {
        if let Some(&hit) = self.singles.get(&(a, b)) {
            return Ok(hit);
        }
        let out = grid_search_single_break(self.y, a, b, self.h)?;
        self.singles.insert((a, b), out);
        Ok(out)
    }

    fn line(&mut self, a: usize, b: usize) -> Result<f64> {
        if let Some(&hit) = self.lines.get(&(a, b)) {
            return Ok(hit);
        }
        let out = line_ssr(self.y, a, b)?;
        self.lines.insert((a, b), out);
        Ok(out)
    }
}

#[derive(Clone)]
struct Entry {
    breaks: Vec<usize>,
    score: f64,
}

fn prefers(score: f64, breaks: &[usize], incumbent: &Entry) -> bool {
    let tol = TIE_EPS * (1.0 + incumbent.score.abs());
    if score < incumbent.score - tol {
        return true;
    }
    if score > incumbent.score + tol {
        return false;
    }
    breaks < incumbent.breaks.as_slice()
}

/// Number of admissible k-break vectors on a length-n series: positions
/// in [h, n - h] with pairwise spacing >= h. Substituting d_i = c_i -
/// (i - 1) h turns these into nondecreasing draws from n - (k + 1) h + 1
/// values, so the count is a binomial coefficient.
fn admissible_count(n: usize, k: usize, h: usize) -> u128 {
    if k == 0 {
        return 1;
    }
    if n < (k + 1) * h {
        return 0;
    }
    let m = (n - (k + 1) * h + 1) as u128;
    let top = m + k as u128 - 1;
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = acc.saturating_mul(top - k as u128 + i) / i;
        if acc > 1 << 80 {
            return u128::MAX;
        }
    }
    acc
}

fn enumeration_cost(n: usize, m_max: usize, h: usize) -> u128 {
    (1..=m_max).fold(0u128, |acc, k| acc.saturating_add(admissible_count(n, k, h)))
}

/// Exact optimum over every admissible k-break vector, by full constrained
/// refits. Rank-deficient candidates are skipped like everywhere else;
/// `None` means no candidate was identifiable.
fn exhaustive_best_k(y: &[f64], k: usize, h: usize) -> Result<Option<Entry>> {
    fn recurse(
        y: &[f64],
        h: usize,
        left: usize,
        start: usize,
        picked: &mut Vec<usize>,
        best: &mut Option<Entry>,
    ) -> Result<()> {
        if left == 0 {
            let seg = Segmentation::new(picked.clone(), h)?;
            let ssr = match fit_ols(y, &seg) {
                Ok(fit) => fit.ssr,
                Err(Error::RankDeficient { .. }) => return Ok(()),
                Err(e) => return Err(e),
            };
            let replace = match best {
                None => true,
                Some(incumbent) => prefers(ssr, picked, incumbent),
            };
            if replace {
                *best = Some(Entry {
                    breaks: picked.clone(),
                    score: ssr,
                });
            }
            return Ok(());
        }
        // Room for the remaining breaks and the final segment.
        let Some(hi) = y.len().checked_sub(left * h) else {
            return Ok(());
        };
        for c in start..=hi {
            picked.push(c);
            recurse(y, h, left - 1, c + h, picked, best)?;
            picked.pop();
        }
        Ok(())
    }

    let mut best = None;
    recurse(y, h, k, h, &mut Vec::with_capacity(k), &mut best)?;
    Ok(best)
}

fn exhaustive_table(y: &[f64], m_max: usize, h: usize) -> Result<SsrTable> {
    let scale: f64 = y.iter().map(|v| v * v).sum();
    let clamp = |ssr: f64| if ssr <= 1e-20 * scale { 0.0 } else { ssr };

    let mut warnings = Vec::new();
    let mut best_by_k: Vec<(Segmentation, f64)> = Vec::with_capacity(m_max + 1);
    let seg0 = Segmentation::none(h);
    let ssr0 = clamp(fit_ols(y, &seg0)?.ssr);
    best_by_k.push((seg0, ssr0));

    for k in 1..=m_max {
        let best = exhaustive_best_k(y, k, h)?.ok_or_else(|| Error::InvalidSegmentation {
            reason: format!("no identifiable placement of {k} breaks exists"),
        })?;
        let score = clamp(best.score);
        if score > best_by_k[k - 1].1 + 1e-12 {
            warnings.push(format!(
                "SSR curve is not monotone at k = {k}: every placement of {k} breaks \
                 fits worse than the best {} breaks",
                k - 1
            ));
        }
        best_by_k.push((Segmentation::new(best.breaks, h)?, score));
    }

    Ok(SsrTable {
        best_by_k,
        single_break_ssr: HashMap::new(),
        warnings,
    })
}

/// Multi-break search. For every k = 0..m_max the table holds the best
/// segmentation found and its SSR from a full constrained re-fit.
///
/// Small problems, where the admissible break vectors across all counts
/// fit a fixed refit budget, are answered by exhaustive enumeration and
/// the reported optima are exact.
///
/// Past that budget, break counts k >= 2 come from a dynamic program over
/// split points j: either the stored (k-1)-break solution of [1, j] is
/// glued to a fresh single-break search on [j+1, i], or j itself becomes
/// the k-th break with an unbroken tail. The additive score that drives
/// the recursion is only a search heuristic once continuity couples the
/// regimes, so the assembled break sets are re-fit on the full series
/// before they are reported, and on series up to length 150 every
/// intermediate cell is re-ranked by exact constrained SSR as well. Each
/// final break count also considers extending the previous count's
/// solution by one break, which keeps the reported SSR curve nonincreasing
/// whenever an extension is admissible.
pub fn dp_segment(y: &[f64], m_max: usize, h: usize) -> Result<SsrTable> {
    let n = y.len();
    if m_max < 1 {
        return Err(Error::InvalidParameter {
            name: "m_max",
            reason: "break budget must be at least 1".into(),
        });
    }
    if h < 1 {
        return Err(Error::InvalidParameter {
            name: "h",
            reason: "minimum segment length must be at least 1".into(),
        });
    }
    let required = ((m_max + 1) * h).max(m_max + 2);
    if n < required {
        return Err(Error::BudgetInfeasible { n, required });
    }

    if enumeration_cost(n, m_max, h) <= ENUMERATION_BUDGET {
        return exhaustive_table(y, m_max, h);
    }

    let exact = n <= EXACT_RERANK_LIMIT;
    let mut memo = Memo {
        y,
        h,
        singles: HashMap::new(),
        lines: HashMap::new(),
    };

    // levels[k][i]: best k-break solution of the prefix [1, i].
    let mut levels: Vec<Vec<Option<Entry>>> = vec![vec![None; n + 1]; m_max + 1];
    // Full candidate pool at i = n, kept for the final re-fit ranking.
    let mut top_candidates: Vec<Vec<Entry>> = vec![Vec::new(); m_max + 1];

    for i in (2 * h).max(3)..=n {
        let (c, ssr) = memo.single(1, i)?;
        let entry = Entry {
            breaks: vec![c],
            score: ssr,
        };
        if i == n {
            top_candidates[1].push(entry.clone());
        }
        levels[1][i] = Some(entry);
    }

    for k in 2..=m_max {
        let lo = ((k + 1) * h).max(k + 2);
        for i in lo..=n {
            let mut best: Option<Entry> = None;
            let mut seen: HashSet<Vec<usize>> = HashSet::new();
            for j in (k * h)..=(i - h) {
                let Some(prefix) = levels[k - 1][j].clone() else {
                    continue;
                };

                // Split at j, j itself the k-th break, unbroken tail.
                let mut with_j = prefix.breaks.clone();
                with_j.push(j);
                let additive_b = prefix.score + memo.line(j + 1, i)?;
                consider(
                    y, i, h, exact, with_j, additive_b, &mut best, &mut seen,
                    if i == n { Some(&mut top_candidates[k]) } else { None },
                )?;

                // Glue seam at j, fresh single-break search on the suffix.
                // The suffix must be long enough to host the three-parameter
                // single-break model, which binds only at h = 1.
                if j + (2 * h).max(3) <= i {
                    let (c, suffix_ssr) = memo.single(j + 1, i)?;
                    let mut with_c = prefix.breaks.clone();
                    with_c.push(c);
                    let additive_a = prefix.score + suffix_ssr;
                    consider(
                        y, i, h, exact, with_c, additive_a, &mut best, &mut seen,
                        if i == n { Some(&mut top_candidates[k]) } else { None },
                    )?;
                }
            }
            levels[k][i] = best;
        }
    }

    let mut warnings = Vec::new();
    let mut best_by_k: Vec<(Segmentation, f64)> = Vec::with_capacity(m_max + 1);
    // SSRs at the rounding-noise scale of the data are zero in double
    // precision; reporting them as such lets a perfect fit terminate the
    // break selection instead of feeding it noise.
    let scale: f64 = y.iter().map(|v| v * v).sum();
    let clamp = |ssr: f64| if ssr <= 1e-20 * scale { 0.0 } else { ssr };
    let seg0 = Segmentation::none(h);
    let ssr0 = clamp(fit_ols(y, &seg0)?.ssr);
    best_by_k.push((seg0, ssr0));

    for k in 1..=m_max {
        let mut pool: Vec<Vec<usize>> = Vec::new();
        let mut candidates = std::mem::take(&mut top_candidates[k]);
        if !exact && candidates.len() > TOP_ADDITIVE_KEEP {
            candidates.sort_by(|a, b| {
                a.score
                    .partial_cmp(&b.score)
                    .unwrap()
                    .then_with(|| a.breaks.cmp(&b.breaks))
            });
            candidates.truncate(TOP_ADDITIVE_KEEP);
        }
        pool.extend(candidates.into_iter().map(|e| e.breaks));
        // One-break extensions of the previous count's winner.
        pool.extend(extensions(best_by_k[k - 1].0.breaks(), n, h));

        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut best: Option<Entry> = None;
        for breaks in pool {
            if breaks.len() != k || !seen.insert(breaks.clone()) {
                continue;
            }
            let seg = Segmentation::new(breaks.clone(), h)?;
            let ssr = match fit_ols(y, &seg) {
                Ok(fit) => clamp(fit.ssr),
                Err(Error::RankDeficient { .. }) => continue,
                Err(e) => return Err(e),
            };
            let replace = match &best {
                None => true,
                Some(incumbent) => prefers(ssr, &breaks, incumbent),
            };
            if replace {
                best = Some(Entry { breaks, score: ssr });
            }
        }
        let Some(best) = best else {
            return Err(Error::InvalidSegmentation {
                reason: format!("no identifiable placement of {k} breaks exists"),
            });
        };
        if best.score > best_by_k[k - 1].1 + 1e-12 {
            warnings.push(format!(
                "SSR curve is not monotone at k = {k}: no admissible extension of the \
                 {}-break solution exists and the search found nothing better",
                k - 1
            ));
        }
        best_by_k.push((Segmentation::new(best.breaks, h)?, best.score));
    }

    Ok(SsrTable {
        best_by_k,
        single_break_ssr: memo.singles,
        warnings,
    })
}

#[allow(clippy::too_many_arguments)]
fn consider(
    y: &[f64],
    i: usize,
    h: usize,
    exact: bool,
    breaks: Vec<usize>,
    additive: f64,
    best: &mut Option<Entry>,
    seen: &mut HashSet<Vec<usize>>,
    collect: Option<&mut Vec<Entry>>,
) -> Result<()> {
    if !seen.insert(breaks.clone()) {
        return Ok(());
    }
    let score = if exact {
        // A break at t = 1 duplicates the intercept column. Such a
        // candidate describes no function a smaller budget cannot, so it
        // is dropped rather than treated as fatal.
        let seg = Segmentation::new(breaks.clone(), h)?;
        match fit_ols(&y[..i], &seg) {
            Ok(fit) => fit.ssr,
            Err(Error::RankDeficient { .. }) => return Ok(()),
            Err(e) => return Err(e),
        }
    } else {
        additive
    };
    if let Some(pool) = collect {
        pool.push(Entry {
            breaks: breaks.clone(),
            score,
        });
    }
    let replace = match best {
        None => true,
        Some(incumbent) => prefers(score, &breaks, incumbent),
    };
    if replace {
        *best = Some(Entry { breaks, score });
    }
    Ok(())
}

/// All break vectors obtained by inserting one admissible break into
/// `breaks` for a series of length n.
fn extensions(breaks: &[usize], n: usize, h: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut bounds = Vec::with_capacity(breaks.len() + 2);
    bounds.push(0);
    bounds.extend_from_slice(breaks);
    bounds.push(n);
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        for c in (lo + h)..=hi.saturating_sub(h) {
            let mut next = breaks.to_vec();
            let pos = next.partition_point(|&b| b < c);
            next.insert(pos, c);
            out.push(next);
        }
    }
    out
}
