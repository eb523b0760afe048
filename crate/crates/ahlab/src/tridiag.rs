//! Tridiagonal linear algebra: Sturm-sequence eigenvalue bisection and two
//! independent solvers for the same banded system (used as a uniqueness
//! cross-check by the eigenfunction module).

/// Count of eigenvalues of the symmetric tridiagonal matrix (diag `d`,
/// off-diag `e`, `e[i]` couples rows `i` and `i+1`) strictly below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let n = d.len();
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let denom = if q.abs() < f64::MIN_POSITIVE.sqrt() {
            f64::MIN_POSITIVE.sqrt().copysign(if q < 0.0 { -1.0 } else { 1.0 })
        } else {
            q
        };
        q = d[i] - x - e[i - 1] * e[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k` smallest eigenvalues of a symmetric tridiagonal matrix, by
/// Gershgorin bracketing and Sturm bisection.
pub fn smallest_eigenvalues(d: &[f64], e: &[f64], k: usize, tol: f64) -> Vec<f64> {
    let n = d.len();
    assert!(k >= 1 && k <= n);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 }
            + if i < n - 1 { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (1..=k)
        .map(|j| {
            let (mut a, mut b) = (lo, hi);
            while b - a > tol * (1.0 + a.abs().max(b.abs())) {
                let m = 0.5 * (a + b);
                if sturm_count(d, e, m) >= j {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Thomas algorithm for a tridiagonal system with sub-diagonal `a`,
/// diagonal `b`, super-diagonal `c` (`a[0]` and `c[n-1]` unused).
pub fn thomas_solve(a: &[f64], b: &[f64], c: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = rhs[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = if i < n - 1 { c[i] / m } else { 0.0 };
        dp[i] = (rhs[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Tridiagonal solve by Gaussian elimination with partial pivoting.
/// Algorithmically independent of [`thomas_solve`]; the eigenfunction module
/// runs both as a uniqueness probe.
pub fn pivoting_solve(a: &[f64], b: &[f64], c: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = b.len();
    // Band storage with one extra super-diagonal for pivoting fill-in.
    let mut diag = b.to_vec();
    let mut sup1 = c.to_vec(); // c[n-1] unused
    let mut sup2 = vec![0.0; n];
    let mut sub = a.to_vec();
    let mut r = rhs.to_vec();
    for i in 0..n - 1 {
        if sub[i + 1].abs() > diag[i].abs() {
            // Row i holds cols (i, i+1, i+2) in (diag, sup1, sup2); row i+1
            // holds cols (i, i+1, i+2) in (sub, diag, sup1). Swap them.
            let old_i = (diag[i], sup1[i], sup2[i]);
            let old_i1 = (
                sub[i + 1],
                diag[i + 1],
                if i + 1 < n - 1 { sup1[i + 1] } else { 0.0 },
            );
            diag[i] = old_i1.0;
            sup1[i] = old_i1.1;
            sup2[i] = old_i1.2;
            sub[i + 1] = old_i.0;
            diag[i + 1] = old_i.1;
            if i + 1 < n - 1 {
                sup1[i + 1] = old_i.2;
            }
            r.swap(i, i + 1);
        }
        let factor = sub[i + 1] / diag[i];
        diag[i + 1] -= factor * sup1[i];
        if i + 1 < n - 1 {
            sup1[i + 1] -= factor * sup2[i];
        }
        r[i + 1] -= factor * r[i];
        sub[i + 1] = 0.0;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = r[i];
        if i + 1 < n {
            s -= sup1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= sup2[i] * x[i + 2];
        }
        x[i] = s / diag[i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sturm_bisection_matches_laplacian_eigenvalues() {
        // -u'' on (0,1), Dirichlet, n interior points: lambda_k known.
        let n = 400;
        let h = 1.0 / (n as f64 + 1.0);
        let d = vec![2.0 / (h * h); n];
        let e = vec![-1.0 / (h * h); n - 1];
        let eigs = smallest_eigenvalues(&d, &e, 3, 1e-12);
        for (k, lam) in eigs.iter().enumerate() {
            let kk = (k + 1) as f64;
            let exact = (2.0 / (h * h)) * (1.0 - (kk * std::f64::consts::PI * h).cos());
            assert_relative_eq!(*lam, exact, max_relative = 1e-9);
        }
    }

    #[test]
    fn solvers_agree() {
        let n = 50;
        let a: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { -1.0 + 0.01 * i as f64 }).collect();
        let b: Vec<f64> = (0..n).map(|i| 4.0 + (i as f64).sin()).collect();
        let c: Vec<f64> = (0..n).map(|i| if i == n - 1 { 0.0 } else { -1.3 }).collect();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let x1 = thomas_solve(&a, &b, &c, &rhs);
        let x2 = pivoting_solve(&a, &b, &c, &rhs);
        for i in 0..n {
            assert_relative_eq!(x1[i], x2[i], epsilon = 1e-10, max_relative = 1e-10);
        }
        // Residual check for one of them.
        for i in 0..n {
            let mut r = b[i] * x1[i] - rhs[i];
            if i > 0 {
                r += a[i] * x1[i - 1];
            }
            if i < n - 1 {
                r += c[i] * x1[i + 1];
            }
            assert!(r.abs() < 1e-10);
        }
    }
}
