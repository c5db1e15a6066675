//! Conditional sum of squares, the cheap objective used to produce
//! starting values for the exact likelihood ascent.

/// Recursive innovations conditioned on zero pre-sample values: the first
/// p observations anchor the AR part and contribute no terms of their own.
pub(crate) fn css(z: &[f64], phi: &[f64], theta: &[f64]) -> f64 {
    let n = z.len();
    let p = phi.len();
    let mut eps = vec![0.0; n];
    let mut total = 0.0;
    for t in p..n {
        let mut e = z[t];
        for (i, &ph) in phi.iter().enumerate() {
            e -= ph * z[t - 1 - i];
        }
        for (j, &th) in theta.iter().enumerate() {
            if t > j {
                e -= th * eps[t - 1 - j];
            }
        }
        eps[t] = e;
        total += e * e;
    }
    total
}
