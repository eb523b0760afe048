//! Boundary-limit extraction.
//!
//! Quantities with expansions in the defining function (powers of `e^{-t}`)
//! are extrapolated to the boundary by polynomial extrapolation in
//! `x = e^{-t}` at a handful of truncation points. The spread between the
//! linear and quadratic extrapolants is reported as the error estimate.

/// A boundary limit together with its extrapolation spread.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct Limit {
    pub value: f64,
    pub error: f64,
}

/// Neville polynomial extrapolation of `(x_i, y_i)` to `x = 0`.
pub fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    let mut p = ys.to_vec();
    for level in 1..n {
        for i in 0..n - level {
            // Value at x=0 of the polynomial through points i..=i+level.
            p[i] = (xs[i + level] * p[i] - xs[i] * p[i + 1]) / (xs[i + level] - xs[i]);
        }
    }
    p[0]
}

/// Extrapolate samples `values[i]` at radial positions `ts[i]` to `t -> inf`
/// in the variable `x = e^{-t}`, using the last few well-separated points.
///
/// `None` when the samples oscillate too much for the extrapolants to agree
/// within `tol` (relative to the value scale).
pub fn boundary_limit(ts: &[f64], values: &[f64], tol: f64) -> Option<Limit> {
    assert_eq!(ts.len(), values.len());
    let t_max = *ts.last()?;
    // Three anchor points separated by ~0.75 in t (factor ~2 in x).
    let sep = 0.75;
    let mut idx = Vec::new();
    for k in 0..3 {
        let target = t_max - sep * k as f64;
        let i = ts
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - target)
                    .abs()
                    .partial_cmp(&(b.1 - target).abs())
                    .unwrap()
            })?
            .0;
        if !idx.contains(&i) {
            idx.push(i);
        }
    }
    if idx.len() < 3 {
        return None;
    }
    let xs: Vec<f64> = idx.iter().map(|&i| (-ts[i]).exp()).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    let quad = neville_at_zero(&xs, &ys);
    let lin = neville_at_zero(&xs[..2], &ys[..2]);
    let spread = (quad - lin).abs();
    let scale = 1.0 + quad.abs();
    if spread > tol * scale.max(1.0) * 1e3 {
        // Orders of magnitude beyond the acceptance tolerance: treat as
        // non-convergent rather than returning a junk limit.
        return None;
    }
    Some(Limit {
        value: quad,
        error: spread.max(f64::EPSILON * scale),
    })
}

/// Richardson extrapolation for a pair of approximations with known order:
/// `a_h` on spacing `h`, `a_h2` on spacing `h/r`. Returns the extrapolated
/// value and the correction magnitude (an error estimate for `a_h2`).
pub fn richardson(a_h: f64, a_h2: f64, ratio: f64, order: f64) -> (f64, f64) {
    let rp = ratio.powf(order);
    let value = (rp * a_h2 - a_h) / (rp - 1.0);
    (value, (value - a_h2).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn neville_recovers_polynomial_limits() {
        let xs = [0.4, 0.2, 0.1];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x + 5.0 * x * x).collect();
        assert_relative_eq!(neville_at_zero(&xs, &ys), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn boundary_limit_of_exponential_tail() {
        let ts: Vec<f64> = (0..200).map(|i| 4.0 + 0.04 * i as f64).collect();
        let vals: Vec<f64> = ts.iter().map(|t| 1.5 + 0.7 * (-t).exp()).collect();
        let lim = boundary_limit(&ts, &vals, 1e-3).unwrap();
        assert_relative_eq!(lim.value, 1.5, epsilon = 1e-8);
        assert!(lim.error < 1e-6);
    }

    #[test]
    fn richardson_second_order() {
        // a(h) = 2 + h^2
        let (v, e) = richardson(2.0 + 0.04, 2.0 + 0.01, 2.0, 2.0);
        assert_relative_eq!(v, 2.0, epsilon = 1e-12);
        assert!(e > 0.0);
    }
}
