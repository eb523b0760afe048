//! Finite differencing on (possibly non-uniform) grids.
//!
//! All grid differentiation in the crate goes through Fornberg's weight
//! algorithm: centered stencils of the requested order in the interior,
//! one-sided stencils of the same order at the ends. Non-uniform grids
//! (geometric refinement near the pole, compactified coordinates near the
//! boundary) are handled by the same code path.

/// Fornberg finite-difference weights.
///
/// Returns, for each derivative order `0..=m`, the weights applied to samples
/// at `nodes` so that `sum_j w[d][j] f(nodes[j])` approximates the `d`-th
/// derivative of `f` at `x0`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    assert!(n > m, "need more nodes than derivative order");
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Derivative of sampled values on a grid, 4th-order accurate.
///
/// Uses a sliding 5-point stencil; near the ends the stencil is shifted
/// rather than shortened, so the order is uniform across the grid.
pub fn derivative(points: &[f64], values: &[f64], order: usize) -> Vec<f64> {
    derivative_with_width(points, values, order, 5.max(order + 3))
}

fn derivative_with_width(points: &[f64], values: &[f64], order: usize, width: usize) -> Vec<f64> {
    let n = points.len();
    assert_eq!(n, values.len());
    assert!(n >= width, "grid too coarse for the requested stencil");
    let mut out = vec![0.0; n];
    for i in 0..n {
        let lo = i
            .saturating_sub(width / 2)
            .min(n - width);
        let nodes = &points[lo..lo + width];
        let w = fornberg_weights(points[i], nodes, order);
        out[i] = w[order]
            .iter()
            .zip(&values[lo..lo + width])
            .map(|(wi, vi)| wi * vi)
            .sum();
    }
    out
}

/// Index range of nodes whose stencil is fully centered (interior in the
/// sense used by curvature residual reports).
pub fn centered_interior(n: usize) -> std::ops::Range<usize> {
    let half = 2; // half-width of the 5-point stencil
    if n <= 2 * half {
        0..0
    } else {
        half..n - half
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_reproduce_classic_stencils() {
        // Centered second derivative on a uniform 3-point stencil: 1 -2 1.
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_relative_eq!(w[2][0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(w[2][1], -2.0, epsilon = 1e-14);
        assert_relative_eq!(w[2][2], 1.0, epsilon = 1e-14);
        // Centered first derivative, 5 points: 1/12 -8/12 0 8/12 -1/12.
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        assert_relative_eq!(w[1][0], 1.0 / 12.0, epsilon = 1e-14);
        assert_relative_eq!(w[1][3], 8.0 / 12.0, epsilon = 1e-14);
    }

    #[test]
    fn fourth_order_convergence_on_sinh() {
        let errs: Vec<f64> = [200usize, 400]
            .iter()
            .map(|&n| {
                let pts: Vec<f64> = (0..=n).map(|i| 5.0 * i as f64 / n as f64).collect();
                let vals: Vec<f64> = pts.iter().map(|t| t.sinh()).collect();
                let d2 = derivative(&pts, &vals, 2);
                pts.iter()
                    .zip(&d2)
                    .map(|(t, d)| (d - t.sinh()).abs())
                    .fold(0.0f64, f64::max)
            })
            .collect();
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 2.6, "observed order {order}, errs {errs:?}");
    }

    #[test]
    fn handles_nonuniform_grids() {
        // Geometric grid on [0.1, 1].
        let pts: Vec<f64> = (0..=100).map(|i| 0.1 * 1.0233f64.powi(i)).collect();
        let vals: Vec<f64> = pts.iter().map(|x| x.ln()).collect();
        let d1 = derivative(&pts, &vals, 1);
        for (x, d) in pts.iter().zip(&d1) {
            assert_relative_eq!(*d, 1.0 / x, max_relative = 5e-6);
        }
    }
}
