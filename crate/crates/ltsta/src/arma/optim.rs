//! Quasi-Newton function minimizer with finite-difference gradients.
//!
//! BFGS on the inverse Hessian with a backtracking Armijo line search.
//! The objective may return infinity to mark infeasible points; the line
//! search simply rejects them. A stalled line search counts as converged
//! (the iterate is optimal to finite-difference precision), while hitting
//! the iteration cap without meeting the tolerance does not.

use nalgebra::{DMatrix, DVector};

const GRAD_REL_STEP: f64 = 1e-6;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

pub(crate) struct OptimResult {
    pub x: Vec<f64>,
    pub converged: bool,
}

fn gradient(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64], fx: f64) -> DVector<f64> {
    let d = x.len();
    let mut g = DVector::zeros(d);
    let mut probe = x.to_vec();
    for i in 0..d {
        let h = GRAD_REL_STEP * (1.0 + x[i].abs());
        probe[i] = x[i] + h;
        let fp = f(&probe);
        probe[i] = x[i] - h;
        let fm = f(&probe);
        probe[i] = x[i];
        g[i] = if fp.is_finite() && fm.is_finite() {
            (fp - fm) / (2.0 * h)
        } else if fp.is_finite() {
            (fp - fx) / h
        } else if fm.is_finite() {
            (fx - fm) / h
        } else {
            0.0
        };
    }
    g
}

pub(crate) fn minimize(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    max_iter: usize,
    tol: f64,
) -> OptimResult {
    let d = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = f(x.as_slice());
    if d == 0 || !fx.is_finite() {
        return OptimResult {
            x: x0.to_vec(),
            converged: fx.is_finite(),
        };
    }
    let mut g = gradient(&mut f, x.as_slice(), fx);
    let mut h_inv = DMatrix::identity(d, d);
    let mut best_x = x.clone();
    let mut best_f = fx;
    let mut converged = false;

    for _ in 0..max_iter {
        if g.norm() < 1e-10 {
            converged = true;
            break;
        }
        let mut dir = -(&h_inv * &g);
        let mut slope = dir.dot(&g);
        if slope >= 0.0 {
            // Curvature information went bad; restart from steepest descent.
            h_inv = DMatrix::identity(d, d);
            dir = -g.clone();
            slope = -g.norm_squared();
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let cand = &x + &dir * step;
            let fc = f(cand.as_slice());
            if fc.is_finite() && fc <= fx + ARMIJO_C1 * step * slope {
                accepted = Some((cand, fc));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            converged = true;
            break;
        };

        let g_new = gradient(&mut f, x_new.as_slice(), f_new);
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            // Sherman-Morrison form of the BFGS inverse update.
            h_inv += (&s * s.transpose()) * (rho * (1.0 + rho * yhy))
                - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }

        let improvement = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        if fx < best_f {
            best_f = fx;
            best_x = x.clone();
        }
        if improvement.abs() < tol {
            converged = true;
            break;
        }
    }

    OptimResult {
        x: best_x.as_slice().to_vec(),
        converged,
    }
}
