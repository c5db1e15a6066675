//! End-to-end acceptance checks. Each test exercises one advertised
//! guarantee at its stated tolerance and prints a single PASS, FAIL, or
//! SKIP line; run with `--nocapture` to see the lines for passing tests.
//!
//! The GDP tests share one fitted model through a `OnceLock` so the
//! 89-observation training fit runs once regardless of test order.

use std::path::PathBuf;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector};

use ltsta::arma::{fit_arma, gaussian_loglik, psi_weights, validate_arma_params};
use ltsta::metrics::compute_metrics;
use ltsta::selection::{self, SelectionPolicy};
use ltsta::simulate::{simulate_series, SimulationSpec};
use ltsta::trend::{build_design_matrix, dp_segment, fit_ols, Segmentation};
use ltsta::{LtstaConfig, LtstaModel, TimeSeries, Transform};

/// Collects gate failures for one criterion and prints the summary line.
struct Criterion {
    idx: usize,
    name: &'static str,
    failures: Vec<String>,
}

impl Criterion {
    fn new(idx: usize, name: &'static str) -> Self {
        Criterion {
            idx,
            name,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.failures.push(msg.into());
        }
    }

    fn finish(self, detail: &str) {
        if self.failures.is_empty() {
            println!("acceptance {:02} {}: PASS ({detail})", self.idx, self.name);
        } else {
            let reasons = self.failures.join("; ");
            println!("acceptance {:02} {}: FAIL ({reasons})", self.idx, self.name);
            panic!("acceptance {:02} {} failed: {reasons}", self.idx, self.name);
        }
    }
}

fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

// Deterministic generator for test inputs, independent of the library's
// simulation stream.
fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit(state: &mut u64) -> f64 {
    ((splitmix(state) >> 11) as f64 + 0.5) * (0.5_f64).powi(53)
}

fn normal(state: &mut u64) -> f64 {
    let u1 = unit(state);
    let u2 = unit(state);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

// ---------------------------------------------------------------- 01

/// Minimal SSR over every admissible break vector of length `k`, by
/// brute force: positions start at h, keep spacing >= h, and leave h
/// observations after the last break. Candidates the constrained OLS
/// rejects as rank deficient are skipped, matching the search's rule.
fn exhaustive_best(y: &[f64], k: usize, h: usize) -> f64 {
    fn recurse(y: &[f64], h: usize, left: usize, start: usize, picked: &mut Vec<usize>, best: &mut f64) {
        if left == 0 {
            let seg = Segmentation::new(picked.clone(), h).unwrap();
            if seg.validate_for(y.len()).is_err() {
                return;
            }
            if let Ok(fit) = fit_ols(y, &seg) {
                if fit.ssr < *best {
                    *best = fit.ssr;
                }
            }
            return;
        }
        let n = y.len();
        if start + h > n {
            return;
        }
        for c in start..=(n - h) {
            picked.push(c);
            recurse(y, h, left - 1, c + h, picked, best);
            picked.pop();
        }
    }

    let mut best = f64::INFINITY;
    let mut picked = Vec::with_capacity(k);
    recurse(y, h, k, h, &mut picked, &mut best);
    best
}

#[test]
fn a01_segmentation_matches_exhaustive_search() {
    let mut crit = Criterion::new(1, "segmentation matches exhaustive search");
    let started = Instant::now();
    let h = 2;
    let mut max_rel = 0.0_f64;

    for seed in 0..50u64 {
        let n = 12 + (seed as usize) % 19;
        let true_breaks: Vec<usize> = match seed % 3 {
            0 => vec![],
            1 => vec![n / 2],
            _ => vec![n / 3, 2 * n / 3],
        };
        let slopes: Vec<f64> = [0.9, -1.1, 1.3][..true_breaks.len() + 1].to_vec();
        let spec = SimulationSpec {
            n,
            beta0: 2.0,
            breaks: true_breaks,
            slopes,
            period: 1,
            seasonal: vec![],
            phi: vec![],
            theta: vec![],
            sigma2: 0.5 + 0.5 * (seed % 4) as f64,
        };
        let y = simulate_series(&spec, seed).unwrap();

        let table = dp_segment(&y, 3, h).unwrap();
        for k in 0..=3 {
            let (seg, dp_ssr) = table.best(k);
            let oracle = exhaustive_best(&y, k, h);
            let rel = (dp_ssr - oracle).abs() / oracle.max(1e-300);
            max_rel = max_rel.max(rel);
            crit.check(
                rel <= 1e-9,
                format!("seed {seed} k {k}: dp {dp_ssr:.12e} vs oracle {oracle:.12e}"),
            );
            // The reported segmentation must reproduce the reported cost.
            let refit = fit_ols(&y, seg).unwrap().ssr;
            crit.check(
                (refit - dp_ssr).abs() <= 1e-9 * dp_ssr.max(1.0),
                format!("seed {seed} k {k}: stored breaks refit to {refit:.12e}"),
            );
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    crit.check(elapsed < 60.0, format!("took {elapsed:.1}s, limit 60s"));
    crit.finish(&format!(
        "50 series, k <= 3, max rel diff {max_rel:.2e}, {elapsed:.1}s"
    ));
}

// ---------------------------------------------------------------- 02

#[test]
fn a02_design_matrix_small_case() {
    let mut crit = Criterion::new(2, "design matrix small case");
    let seg = Segmentation::new(vec![3], 1).unwrap();
    let x = build_design_matrix(5, &seg).unwrap();
    let expected = [
        [1.0, 1.0, 0.0],
        [1.0, 2.0, 0.0],
        [1.0, 3.0, 0.0],
        [1.0, 3.0, 1.0],
        [1.0, 3.0, 2.0],
    ];
    crit.check(
        x.nrows() == 5 && x.ncols() == 3,
        format!("shape {}x{}, want 5x3", x.nrows(), x.ncols()),
    );
    if x.nrows() == 5 && x.ncols() == 3 {
        for (i, row) in expected.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                crit.check(
                    x[(i, j)] == *want,
                    format!("entry ({i},{j}) = {}, want {want}", x[(i, j)]),
                );
            }
        }
    }
    crit.finish("n=5, break at 3: exact hinge basis");
}

// ------------------------------------------------------- GDP fixture

struct GdpRun {
    model: LtstaModel,
    fit_secs: f64,
}

fn gdp_logs() -> Vec<f64> {
    let path = data_path("gdp_index.csv");
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|line| {
            let field = line.split(',').nth(1).unwrap();
            field.trim().parse::<f64>().unwrap()
        })
        .collect();
    assert!(values.len() >= 89, "GDP fixture holds {} rows", values.len());
    // Training split ends at 2024Q1, observation 89 of the 2002Q1 start.
    values[..89].iter().map(|v| v.ln()).collect()
}

fn gdp() -> &'static GdpRun {
    static GDP: OnceLock<GdpRun> = OnceLock::new();
    GDP.get_or_init(|| {
        let path = data_path("gdp_index.csv");
        let text = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let values: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|line| line.split(',').nth(1).unwrap().trim().parse().unwrap())
            .collect();
        let series = TimeSeries::with_start_text(values[..89].to_vec(), 4, Some("2002Q1")).unwrap();
        let config = LtstaConfig {
            transform: Transform::log(),
            manual_m: Some(5),
            ..LtstaConfig::default()
        };
        let started = Instant::now();
        let model = LtstaModel::fit(&series, &config).unwrap();
        GdpRun {
            model,
            fit_secs: started.elapsed().as_secs_f64(),
        }
    })
}

// ---------------------------------------------------------------- 03

#[test]
fn a03_gdp_break_locations() {
    let mut crit = Criterion::new(3, "gdp break locations");
    let run = gdp();
    let breaks = run.model.trend.segmentation.breaks();
    // 2008Q1, 2009Q1, 2019Q4, 2020Q2, 2020Q4 as 1-based offsets from 2002Q1.
    let targets = [25usize, 29, 72, 74, 76];
    crit.check(
        breaks.len() == targets.len(),
        format!("{} breaks, want {}", breaks.len(), targets.len()),
    );
    if breaks.len() == targets.len() {
        for (got, want) in breaks.iter().zip(targets) {
            crit.check(
                got.abs_diff(want) <= 1,
                format!("break {got} not within 1 quarter of {want}"),
            );
        }
    }
    crit.check(
        run.fit_secs < 300.0,
        format!("fit took {:.0}s, limit 300s", run.fit_secs),
    );
    crit.finish(&format!("breaks {breaks:?}, fit {:.1}s", run.fit_secs));
}

// ---------------------------------------------------------------- 04

#[test]
fn a04_gdp_parameter_intervals() {
    let mut crit = Criterion::new(4, "gdp parameter intervals");
    let model = &gdp().model;
    let beta0 = model.trend.beta0_first;
    let slope3 = model.trend.slopes.get(2).copied().unwrap_or(f64::NAN);
    crit.check(
        (4.272..=4.296).contains(&beta0),
        format!("beta0 {beta0:.4} outside [4.272, 4.296]"),
    );
    crit.check(
        (slope3 - 0.0059).abs() <= 0.0005,
        format!("regime-3 slope {slope3:.5} not within 0.0005 of 0.0059"),
    );
    let theta = &model.arma.theta;
    crit.check(theta.len() == 2, format!("{} MA terms, want 2", theta.len()));
    if theta.len() == 2 {
        crit.check(
            (0.010..=0.417).contains(&theta[0]),
            format!("theta1 {:.4} outside [0.010, 0.417]", theta[0]),
        );
        crit.check(
            (0.071..=0.583).contains(&theta[1]),
            format!("theta2 {:.4} outside [0.071, 0.583]", theta[1]),
        );
    }
    let sigma2 = model.arma.sigma2;
    crit.check(
        (2.73e-5..=4.78e-5).contains(&sigma2),
        format!("sigma2 {sigma2:.3e} outside [2.73e-5, 4.78e-5]"),
    );
    crit.finish(&format!(
        "beta0 {beta0:.4}, s3 {slope3:.5}, theta {:?}, sigma2 {sigma2:.3e}",
        model
            .arma
            .theta
            .iter()
            .map(|t| (t * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    ));
}

// ---------------------------------------------------------------- 05

#[test]
fn a05_gdp_order_selection() {
    let mut crit = Criterion::new(5, "gdp order selection");
    let model = &gdp().model;
    let nh = model.seasonal.n_harmonics();
    // Two harmonics at period 4 carry four seasonal coefficients, the
    // second sine being pinned to zero at the Nyquist frequency.
    crit.check(nh == 2, format!("{nh} harmonics, want 2"));
    crit.check(
        model.arma.p == 0 && model.arma.q == 2,
        format!("orders ({}, {}), want (0, 2)", model.arma.p, model.arma.q),
    );
    crit.finish(&format!(
        "n_harmonics {nh}, error process MA({})",
        model.arma.q
    ));
}

// ---------------------------------------------------------------- 06

#[test]
fn a06_gdp_break_count_heuristics() {
    let mut crit = Criterion::new(6, "gdp break count heuristics");
    let logs = gdp_logs();
    let curve = dp_segment(&logs, 10, 2).unwrap().ssr_curve();

    let knee = selection::l_method(&curve).unwrap();
    crit.check(knee == 3, format!("L-method knee {knee}, want 3"));

    let ratio = selection::select_num_breaks(&curve, SelectionPolicy::Ratio).unwrap();
    crit.check(
        ratio.m_selected == 2,
        format!("ratio policy chose {}, want 2", ratio.m_selected),
    );

    let abs = selection::select_num_breaks(&curve, SelectionPolicy::Absolute).unwrap();
    crit.check(
        abs.m_selected == 6,
        format!("absolute policy chose {}, want 6", abs.m_selected),
    );
    let tau_d = abs.tau_d.unwrap_or(f64::NAN);
    let d6 = if abs.m_l + 1 <= 6 && 6 - abs.m_l <= abs.diffs.len() {
        abs.diffs[6 - abs.m_l - 1]
    } else {
        f64::NAN
    };
    crit.check(
        d6 >= tau_d && d6 < 2.0 * tau_d,
        format!("d6 {d6:.3e} not near threshold {tau_d:.3e}"),
    );
    crit.finish(&format!(
        "knee 3, ratio 2, absolute 6, d6/tau_d {:.2}",
        d6 / tau_d
    ));
}

// ---------------------------------------------------------------- 07

#[test]
fn a07_arma_estimator_consistency() {
    let mut crit = Criterion::new(7, "arma estimator consistency");
    let spec = SimulationSpec {
        n: 2000,
        beta0: 0.0,
        breaks: vec![],
        slopes: vec![0.0],
        period: 1,
        seasonal: vec![],
        phi: vec![0.5],
        theta: vec![0.3],
        sigma2: 1.0,
    };
    let mut phi_err = Vec::new();
    let mut theta_err = Vec::new();
    for seed in 0..20u64 {
        let z = simulate_series(&spec, seed).unwrap();
        let fit = fit_arma(&z, 1, 1).unwrap();
        crit.check(
            validate_arma_params(&fit.phi, &fit.theta).is_ok(),
            format!("seed {seed}: estimate leaves the stability region"),
        );
        phi_err.push((fit.phi[0] - 0.5).abs());
        theta_err.push((fit.theta[0] - 0.3).abs());
    }
    let med_phi = median(&mut phi_err);
    let med_theta = median(&mut theta_err);
    crit.check(
        med_phi <= 0.05,
        format!("median |phi error| {med_phi:.4} > 0.05"),
    );
    crit.check(
        med_theta <= 0.05,
        format!("median |theta error| {med_theta:.4} > 0.05"),
    );
    crit.finish(&format!(
        "20 fits of ARMA(1,1), median errors phi {med_phi:.3}, theta {med_theta:.3}"
    ));
}

// ---------------------------------------------------------------- 08

/// Log density of z under the exact zero-mean ARMA covariance, built the
/// slow way: psi-weight autocovariances into a dense Toeplitz matrix and
/// a Cholesky solve.
fn dense_loglik(z: &[f64], phi: &[f64], theta: &[f64], sigma2: f64) -> f64 {
    let n = z.len();
    let count = 4000;
    let psi = psi_weights(phi, theta, count);
    let mut gamma = vec![0.0; n];
    for (lag, g) in gamma.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..count - lag {
            acc += psi[j] * psi[j + lag];
        }
        *g = sigma2 * acc;
    }
    let cov = DMatrix::from_fn(n, n, |i, j| gamma[i.abs_diff(j)]);
    let chol = Cholesky::new(cov).expect("ARMA covariance is positive definite");
    let log_det = 2.0 * (0..n).map(|i| chol.l()[(i, i)].ln()).sum::<f64>();
    let zv = DVector::from_column_slice(z);
    let quad = zv.dot(&chol.solve(&zv));
    -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + quad)
}

/// Coefficients drawn inside the order-2 stability triangle, shrunk away
/// from its boundary.
fn draw_poly(order: usize, state: &mut u64) -> Vec<f64> {
    match order {
        0 => vec![],
        1 => vec![1.6 * unit(state) - 0.8],
        _ => {
            let x2 = 1.2 * unit(state) - 0.6;
            let x1 = (1.0 - x2) * (1.8 * unit(state) - 0.9);
            vec![x1, x2]
        }
    }
}

#[test]
fn a08_likelihood_dense_oracle() {
    let mut crit = Criterion::new(8, "likelihood dense oracle");
    let mut max_diff = 0.0_f64;
    for pair in 0..100u64 {
        let mut state = 0x5EED_0000_0000_0000 ^ pair;
        let n = 5 + (splitmix(&mut state) % 46) as usize;
        let p = (splitmix(&mut state) % 3) as usize;
        let q = (splitmix(&mut state) % 3) as usize;
        let mut phi = draw_poly(p, &mut state);
        let mut theta = draw_poly(q, &mut state);
        for _ in 0..8 {
            if validate_arma_params(&phi, &theta).is_ok() {
                break;
            }
            phi.iter_mut().for_each(|c| *c *= 0.85);
            theta.iter_mut().for_each(|c| *c *= 0.85);
        }
        assert!(
            validate_arma_params(&phi, &theta).is_ok(),
            "pair {pair}: could not shrink into the stability region"
        );
        let sigma2 = 0.4 + 1.8 * unit(&mut state);
        let z: Vec<f64> = (0..n).map(|_| 1.3 * normal(&mut state)).collect();

        let fast = gaussian_loglik(&z, &phi, &theta, sigma2).unwrap();
        let dense = dense_loglik(&z, &phi, &theta, sigma2);
        let diff = (fast - dense).abs();
        max_diff = max_diff.max(diff);
        crit.check(
            diff <= 1e-8,
            format!("pair {pair} (n {n}, p {p}, q {q}): |{fast:.10} - {dense:.10}| = {diff:.2e}"),
        );
    }
    crit.finish(&format!("100 pairs, max |diff| {max_diff:.2e}"));
}

// ---------------------------------------------------------------- 09

#[test]
fn a09_metric_identities() {
    let mut crit = Criterion::new(9, "metric identities");
    let train: Vec<f64> = (1..=12).map(|t| t as f64).collect();

    let actual = [3.2, -1.0, 7.7, 2.4];
    let perfect = compute_metrics(&actual, &actual, &train, 4).unwrap();
    crit.check(
        perfect.mae == 0.0
            && perfect.rmse == 0.0
            && perfect.smape_percent == 0.0
            && perfect.mase == 0.0,
        format!("perfect forecast gave {perfect:?}"),
    );

    // In-sample seasonal-naive steps on 1..12 at period 4 are all 4, so
    // forecast errors of 4 pin MASE at exactly 1.
    let anchor = compute_metrics(&[24.0, 16.0, 24.0, 16.0], &[20.0; 4], &train, 4).unwrap();
    crit.check(
        (anchor.mase - 1.0).abs() <= 1e-12,
        format!("MASE anchor {:.15}, want 1", anchor.mase),
    );

    let mut state = 0x0915_2026_u64;
    let mut worst_gap = 0.0_f64;
    let mut max_smape = 0.0_f64;
    for case in 0..1000 {
        let len = 1 + (splitmix(&mut state) % 8) as usize;
        let mut f = Vec::with_capacity(len);
        let mut a = Vec::with_capacity(len);
        for _ in 0..len {
            let mut fv = 200.0 * unit(&mut state) - 100.0;
            let mut av = 200.0 * unit(&mut state) - 100.0;
            if splitmix(&mut state) % 7 == 0 {
                fv = 0.0;
            }
            if splitmix(&mut state) % 11 == 0 {
                av = 0.0;
            }
            f.push(fv);
            a.push(av);
        }
        let m = compute_metrics(&f, &a, &train, 4).unwrap();
        worst_gap = worst_gap.max(m.mae - m.rmse);
        max_smape = max_smape.max(m.smape_percent);
        crit.check(
            m.rmse >= m.mae - 1e-12,
            format!("case {case}: rmse {} < mae {}", m.rmse, m.mae),
        );
        crit.check(
            (0.0..=200.0 + 1e-12).contains(&m.smape_percent),
            format!("case {case}: smape {}", m.smape_percent),
        );
    }
    // Exact sign flip sits on the sMAPE ceiling; identical zeros sit at 0.
    let flip = compute_metrics(&[5.0], &[-5.0], &train, 4).unwrap();
    crit.check(
        (flip.smape_percent - 200.0).abs() <= 1e-12,
        format!("sign flip smape {}", flip.smape_percent),
    );
    let zeros = compute_metrics(&[0.0, 0.0], &[0.0, 0.0], &train, 4).unwrap();
    crit.check(
        zeros.smape_percent == 0.0,
        format!("all-zero smape {}", zeros.smape_percent),
    );
    crit.finish(&format!(
        "zeros, MASE anchor, 1000 random pairs: max smape {max_smape:.1}, rmse >= mae"
    ));
}

// ---------------------------------------------------------------- 10

#[test]
fn a10_synthetic_recovery_cli() {
    let mut crit = Criterion::new(10, "synthetic recovery through the cli");
    let exe = env!("CARGO_BIN_EXE_ltsta");
    let dir = tempfile::tempdir().unwrap();

    let spec = serde_json::json!({
        "n": 200,
        "beta0": 5.0,
        "breaks": [70, 140],
        "slopes": [0.8, -0.5, 0.6],
        "period": 4,
        "seasonal": [[1.2, 0.5]],
        "phi": [0.5],
        "theta": [],
        "sigma2": 1.0
    });
    let spec_path = dir.path().join("dgp.json");
    std::fs::write(&spec_path, spec.to_string()).unwrap();
    let true_breaks = [70i64, 140];
    let true_slopes = [0.8, -0.5, 0.6];

    let mut break_hits = 0;
    let mut slope_hits = 0;
    for seed in 0..100u32 {
        let sim_path = dir.path().join(format!("sim_{seed}.csv"));
        let out_dir = dir.path().join(format!("fit_{seed}"));
        let sim = Command::new(exe)
            .args(["simulate", "--spec"])
            .arg(&spec_path)
            .arg("--output")
            .arg(&sim_path)
            .args(["--seed", &seed.to_string()])
            .output()
            .unwrap();
        assert!(
            sim.status.success(),
            "simulate failed for seed {seed}: {}",
            String::from_utf8_lossy(&sim.stderr)
        );
        let fit = Command::new(exe)
            .args(["fit", "--input"])
            .arg(&sim_path)
            .arg("--out-dir")
            .arg(&out_dir)
            .args([
                "--period", "4", "--policy", "ratio", "--m-max", "8", "--p-max", "1", "--q-max",
                "1",
            ])
            .output()
            .unwrap();
        assert!(
            fit.status.success(),
            "fit failed for seed {seed}: {}",
            String::from_utf8_lossy(&fit.stderr)
        );

        let artifact: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out_dir.join("model.json")).unwrap())
                .unwrap();
        let breaks: Vec<i64> = artifact["summary"]["breaks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_i64().unwrap())
            .collect();
        let slopes: Vec<f64> = artifact["model"]["trend"]["slopes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();

        let breaks_ok = breaks.len() == 2
            && breaks
                .iter()
                .zip(true_breaks)
                .all(|(got, want)| (got - want).abs() <= 1);
        if breaks_ok {
            break_hits += 1;
        }
        let slopes_ok = slopes.len() == 3
            && slopes
                .iter()
                .zip(true_slopes)
                .all(|(got, want)| (got - want).abs() <= 0.10 * want.abs());
        if slopes_ok {
            slope_hits += 1;
        }
    }

    crit.check(
        break_hits >= 95,
        format!("breaks within 1 index in only {break_hits}/100 runs"),
    );
    crit.check(
        slope_hits >= 90,
        format!("slopes within 10% in only {slope_hits}/100 runs"),
    );
    crit.finish(&format!(
        "breaks {break_hits}/100 within 1 index, slopes {slope_hits}/100 within 10%"
    ));
}

// ---------------------------------------------------------------- 11

#[test]
fn a11_cif_benchmark() {
    let dataset = data_path("cif2016.txt");
    if !dataset.exists() {
        println!(
            "acceptance 11 cif benchmark: SKIP (place the CIF 2016 dataset at {})",
            dataset.display()
        );
        return;
    }
    let mut crit = Criterion::new(11, "cif benchmark");
    let exe = env!("CARGO_BIN_EXE_ltsta");
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("results.csv");
    let out = Command::new(exe)
        .args(["benchmark", "--input"])
        .arg(&dataset)
        .arg("--output")
        .arg(&table)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "benchmark failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let text = std::fs::read_to_string(&table).unwrap();
    let mut mases = Vec::new();
    let mut smapes = Vec::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[0].starts_with("aggregate_") {
            continue;
        }
        crit.check(
            fields[7].is_empty(),
            format!("series {} failed: {}", fields[0], fields[7]),
        );
        if fields[7].is_empty() {
            smapes.push(fields[5].parse::<f64>().unwrap());
            mases.push(fields[6].parse::<f64>().unwrap());
        }
    }
    crit.check(
        mases.len() == 72,
        format!("{} scored series, want 72", mases.len()),
    );
    let med_mase = median(&mut mases);
    let med_smape = median(&mut smapes);
    crit.check(
        med_mase <= 0.70,
        format!("median MASE {med_mase:.3} > 0.70"),
    );
    crit.check(
        med_smape <= 8.0,
        format!("median sMAPE {med_smape:.2} > 8.0"),
    );
    crit.finish(&format!(
        "72 series, median MASE {med_mase:.3}, median sMAPE {med_smape:.2}"
    ));
}
