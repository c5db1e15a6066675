//! State-space innovations filter for the zero-mean Gaussian ARMA process.
//!
//! The ARMA(p,q) process is cast in the companion form with state
//! dimension r = max(p, q+1): transition matrix T carries the AR
//! coefficients in its first column and an identity superdiagonal, the
//! innovation loads through R = (1, theta_1, .., theta_{r-1})', and the
//! observation is the first state element with no measurement noise. The
//! filter starts from the exact stationary state covariance, so the
//! one-step prediction errors and variances it produces yield the exact
//! Gaussian likelihood, not a conditional approximation.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub(crate) struct StateSpace {
    pub t_mat: DMatrix<f64>,
    pub r_vec: DVector<f64>,
    pub r: usize,
}

impl StateSpace {
    pub fn new(phi: &[f64], theta: &[f64]) -> Self {
        let r = phi.len().max(theta.len() + 1);
        let mut t_mat = DMatrix::zeros(r, r);
        for (i, &p) in phi.iter().enumerate() {
            t_mat[(i, 0)] = p;
        }
        for i in 0..r.saturating_sub(1) {
            t_mat[(i, i + 1)] = 1.0;
        }
        let mut r_vec = DVector::zeros(r);
        r_vec[0] = 1.0;
        for (j, &t) in theta.iter().enumerate() {
            r_vec[j + 1] = t;
        }
        StateSpace { t_mat, r_vec, r }
    }

    /// Stationary state covariance at unit innovation variance: the
    /// solution of P = T P T' + R R', obtained from the vectorized linear
    /// system (I - T (x) T) vec(P) = vec(R R').
    pub fn stationary_covariance(&self) -> Result<DMatrix<f64>> {
        let r2 = self.r * self.r;
        let q = &self.r_vec * self.r_vec.transpose();
        let lhs = DMatrix::identity(r2, r2) - self.t_mat.kronecker(&self.t_mat);
        let rhs = DVector::from_column_slice(q.as_slice());
        let sol = lhs.lu().solve(&rhs).ok_or(Error::NonStationaryParams {
            property: "causal",
            reason: "stationary covariance system is singular".into(),
        })?;
        let p = DMatrix::from_column_slice(self.r, self.r, sol.as_slice());
        Ok((&p + p.transpose()) * 0.5)
    }
}

pub(crate) struct FilterOutput {
    /// One-step prediction errors v_t.
    pub innovations: Vec<f64>,
    pub sum_ln_f: f64,
    pub sum_v2_over_f: f64,
    /// Predicted state for time n+1 given the full sample.
    pub predicted_state: DVector<f64>,
    pub state_space: StateSpace,
}

/// Runs the exact filter at unit innovation variance. Scaling by a sigma2
/// multiplies every f_t and leaves the innovations unchanged, so the
/// output supports both the concentrated and the full likelihood.
pub(crate) fn filter(z: &[f64], phi: &[f64], theta: &[f64]) -> Result<FilterOutput> {
    let ss = StateSpace::new(phi, theta);
    let q = &ss.r_vec * ss.r_vec.transpose();
    let mut p = ss.stationary_covariance()?;
    let mut a = DVector::zeros(ss.r);
    let mut innovations = Vec::with_capacity(z.len());
    let mut sum_ln_f = 0.0;
    let mut sum_v2_over_f = 0.0;
    for &obs in z {
        let f = p[(0, 0)];
        if !(f > 1e-300) || !f.is_finite() {
            return Err(Error::NonStationaryParams {
                property: "invertible",
                reason: "one-step prediction variance collapsed".into(),
            });
        }
        let v = obs - a[0];
        sum_ln_f += f.ln();
        sum_v2_over_f += v * v / f;
        innovations.push(v);
        // Gain K = T P e1 / f; covariance update keeps symmetry explicitly.
        let m = &ss.t_mat * p.column(0);
        a = &ss.t_mat * a + &m * (v / f);
        p = &ss.t_mat * &p * ss.t_mat.transpose() + &q - &m * m.transpose() / f;
        p = (&p + p.transpose()) * 0.5;
    }
    Ok(FilterOutput {
        innovations,
        sum_ln_f,
        sum_v2_over_f,
        predicted_state: a,
        state_space: ss,
    })
}
