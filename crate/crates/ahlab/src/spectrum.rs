//! The L^2 spectrum of the radial Laplacian.
//!
//! On a cohomogeneity-one metric the rotationally invariant part of the
//! Laplacian is the Sturm-Liouville operator
//!
//! ```text
//! Delta u = -u'' - (V'/V) u',      V = prod f_i^{m_i},
//! ```
//!
//! and for asymptotically hyperbolic metrics the essential spectrum starts at
//! `n^2/4`. Two independent routes to the low spectrum are provided:
//!
//! * [`dirichlet_eigenvalues`]: finite-volume discretization of
//!   `-(V u')' = lambda V u` on a truncation `[t_min, T]` (natural boundary
//!   condition at the pole, Dirichlet at `T`), reduced to a symmetric
//!   tridiagonal problem and solved by Sturm bisection, with Richardson
//!   refinement in the mesh width.
//! * [`shoot_eigenvalues`]: matching of the regular solution from the pole
//!   against the recessive solution integrated backward from `T`, locating
//!   zeros of the Wronskian in `lambda`. This only sees genuine `L^2`
//!   eigenvalues below the essential threshold.
//!
//! [`lambda0_estimate`] combines the two: if shooting finds point spectrum,
//! the bottom of the spectrum is its minimum; otherwise the truncated
//! Dirichlet values follow the scattering profile
//! `lambda(T) = a + pi^2/(T + delta)^2` and `a` is fitted from a truncation
//! schedule.

use serde::{Deserialize, Serialize};

use crate::extrapolate;
use crate::geometry::WarpedMetric;
use crate::ode::{self, OdeOptions};
use crate::tridiag;
use crate::{Error, Result};

/// Bottom of the essential spectrum of an asymptotically hyperbolic
/// (n+1)-manifold, `n^2/4`.
pub fn essential_threshold(n: usize) -> f64 {
    let nf = n as f64;
    nf * nf / 4.0
}

/// `lambda_0` of the quotient model with totally geodesic `H^{d+1}` core:
/// `d (n - d)`.
pub fn sullivan_exponent(n: usize, d: f64) -> Result<f64> {
    let nf = n as f64;
    if !(0.0..=nf).contains(&d) {
        return Err(Error::invalid(format!(
            "limit-set dimension must lie in [0, {nf}]"
        )));
    }
    Ok(d * (nf - d))
}

/// Bottom of the spectrum of a geometrically finite quotient with limit-set
/// dimension `d`: `d (n - d)` once `d` exceeds `n/2`, else the essential
/// threshold.
pub fn sullivan_lambda0(n: usize, d: f64) -> Result<f64> {
    let v = sullivan_exponent(n, d)?;
    Ok(if d <= n as f64 / 2.0 {
        essential_threshold(n)
    } else {
        v
    })
}

fn check_truncation(metric: &WarpedMetric, t_cut: f64) -> Result<()> {
    if !(t_cut > metric.grid.t_min) || t_cut > metric.grid.t_max + 1e-12 {
        return Err(Error::invalid(format!(
            "truncation T = {t_cut} outside the metric's radial range [{}, {}]",
            metric.grid.t_min, metric.grid.t_max
        )));
    }
    Ok(())
}

/// Smallest `k` Dirichlet eigenvalues of the radial Laplacian on
/// `[t_min, T]`, at a single mesh width.
fn dirichlet_on_mesh(metric: &WarpedMetric, t_cut: f64, k: usize, cells: usize) -> Vec<f64> {
    let t0 = metric.grid.t_min;
    let h = (t_cut - t0) / cells as f64;
    // Nodes 0..cells; node `cells` carries the Dirichlet condition and is
    // eliminated. Flux form: A u = lambda B u with
    //   A_jj = (V_{j-1/2} + V_{j+1/2})/h,  A_{j,j+1} = -V_{j+1/2}/h,
    // and B_j the cell volume (half cells at the ends).
    let n_unknown = cells; // nodes 0..cells-1
    let vol = |t: f64| metric.volume_at(t.min(metric.grid.t_max));
    let half: Vec<f64> = (0..cells)
        .map(|j| vol(t0 + h * (j as f64 + 0.5)))
        .collect();
    let mut diag = vec![0.0; n_unknown];
    let mut off = vec![0.0; n_unknown - 1];
    let mut b = vec![0.0; n_unknown];
    for j in 0..n_unknown {
        let left = if j == 0 { 0.0 } else { half[j - 1] };
        let right = half[j];
        diag[j] = (left + right) / h;
        if j + 1 < n_unknown {
            off[j] = -right / h;
        }
        // Simpson cell volume over [t_j - h/2, t_j + h/2] (half cell at the
        // pole end).
        let tj = t0 + h * j as f64;
        b[j] = if j == 0 {
            h / 12.0 * (vol(tj) + 4.0 * vol(tj + 0.25 * h) + vol(tj + 0.5 * h))
        } else {
            h / 6.0 * (vol(tj - 0.5 * h) + 4.0 * vol(tj) + vol(tj + 0.5 * h))
        };
    }
    // Symmetric reduction C = B^{-1/2} A B^{-1/2}.
    let d: Vec<f64> = (0..n_unknown).map(|j| diag[j] / b[j]).collect();
    let e: Vec<f64> = (0..n_unknown - 1)
        .map(|j| off[j] / (b[j] * b[j + 1]).sqrt())
        .collect();
    tridiag::smallest_eigenvalues(&d, &e, k, 1e-12)
}

/// Eigenvalue with an error estimate from mesh refinement.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub value: f64,
    pub error: f64,
}

/// Smallest `k` Dirichlet eigenvalues of the radial Laplacian on the
/// truncation `[t_min, T]`, Richardson-refined over two mesh widths.
pub fn dirichlet_eigenvalues(
    metric: &WarpedMetric,
    t_cut: f64,
    k: usize,
    cells: usize,
) -> Result<Vec<Eigenvalue>> {
    check_truncation(metric, t_cut)?;
    if k == 0 || cells < 32 {
        return Err(Error::invalid("need k >= 1 and at least 32 cells"));
    }
    let coarse = dirichlet_on_mesh(metric, t_cut, k, cells);
    let fine = dirichlet_on_mesh(metric, t_cut, k, 2 * cells);
    Ok(coarse
        .iter()
        .zip(&fine)
        .map(|(&a, &b)| {
            let (value, err) = extrapolate::richardson(a, b, 2.0, 2.0);
            Eigenvalue { value, error: err }
        })
        .collect())
}

/// Integrate the eigenvalue equation `u'' + (V'/V) u' + lambda u = 0` as a
/// first-order system from `(t0, u0, du0)` to `t1`.
fn eigen_solution(
    metric: &WarpedMetric,
    lambda: f64,
    t0: f64,
    u0: f64,
    du0: f64,
    t1: f64,
) -> Result<(f64, f64)> {
    let opts = OdeOptions {
        rel_tol: 1e-11,
        abs_tol: 1e-13,
        h_max: 0.1,
        ..OdeOptions::default()
    };
    let traj = ode::integrate(
        |t, y| {
            let drift = metric.log_volume_deriv_at(t);
            vec![y[1], -drift * y[1] - lambda * y[0]]
        },
        t0,
        &[u0, du0],
        t1,
        &opts,
        |_, _| false,
    )?;
    let last = traj.samples.last().unwrap();
    Ok((last.y[0], last.y[1]))
}

/// Wronskian mismatch between the regular solution from the pole and the
/// recessive solution from the truncation radius, evaluated at mid-interval
/// and normalized to be scale-free.
fn shoot_mismatch(metric: &WarpedMetric, t_cut: f64, lambda: f64) -> Result<f64> {
    let nf = metric.n as f64;
    let t_match = 0.5 * (metric.grid.t_min + t_cut);

    // Outward: regular at the pole, u = 1 - lambda t^2 / (2(n+1)) + ...;
    // without a pole, a natural (Neumann) start.
    let (t_start, u0, du0) = if metric.origin_closure {
        let ts = metric.grid.points[1].max(1e-3);
        let tau = ts - metric.grid.t_min;
        (
            ts,
            1.0 - lambda * tau * tau / (2.0 * (nf + 1.0)),
            -lambda * tau / (nf + 1.0),
        )
    } else {
        (metric.grid.t_min, 1.0, 0.0)
    };
    let (ul, dul) = eigen_solution(metric, lambda, t_start, u0, du0, t_match)?;

    // Backward: recessive decay rate s_+ = n/2 + sqrt(n^2/4 - lambda); the
    // growing mode dies off backward, so this is the stable direction.
    let disc = nf * nf / 4.0 - lambda;
    if disc <= 0.0 {
        return Err(Error::invalid(
            "shooting is only defined below the essential threshold",
        ));
    }
    let s_plus = nf / 2.0 + disc.sqrt();
    let (ur, dur) = eigen_solution(metric, lambda, t_cut, 1.0, -s_plus, t_match)?;

    let w = ul * dur - dul * ur;
    let scale = (ul.abs() + dul.abs()) * (ur.abs() + dur.abs());
    Ok(w / scale.max(f64::MIN_POSITIVE))
}

/// `L^2` eigenvalues below the essential threshold, by Wronskian shooting.
///
/// Scans `lambda` in `(lo, n^2/4 - margin)` and bisects each sign change of
/// the mismatch to `tol`. Returns an empty list when there is no point
/// spectrum below the threshold.
pub fn shoot_eigenvalues(
    metric: &WarpedMetric,
    t_cut: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    check_truncation(metric, t_cut)?;
    let threshold = essential_threshold(metric.n);
    let margin = 1e-4 * threshold.max(1.0);
    let lo = 1e-6;
    let hi = threshold - margin;
    if hi <= lo {
        return Ok(Vec::new());
    }
    let scan = 200;
    let mut out = Vec::new();
    let mut prev_l = lo;
    let mut prev_w = shoot_mismatch(metric, t_cut, prev_l)?;
    for i in 1..=scan {
        let l = lo + (hi - lo) * i as f64 / scan as f64;
        let w = shoot_mismatch(metric, t_cut, l)?;
        if prev_w == 0.0 {
            out.push(prev_l);
        } else if prev_w * w < 0.0 {
            let (mut a, mut b) = (prev_l, l);
            let mut wa = prev_w;
            while b - a > tol {
                let m = 0.5 * (a + b);
                let wm = shoot_mismatch(metric, t_cut, m)?;
                if wa * wm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    wa = wm;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev_l = l;
        prev_w = w;
    }
    Ok(out)
}

/// How [`lambda0_estimate`] arrived at its value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lambda0Method {
    /// Point spectrum below `n^2/4` was found by shooting; the estimate is
    /// its minimum.
    ShootingEigenvalue,
    /// No point spectrum; the truncated Dirichlet values were fitted with
    /// `lambda(T) = a + pi^2/(T + delta)^2`.
    ThresholdFit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lambda0Estimate {
    pub value: f64,
    pub error: f64,
    pub method: Lambda0Method,
    /// `(T, lowest Dirichlet eigenvalue)` per truncation radius.
    pub truncation_values: Vec<(f64, f64)>,
    pub essential_threshold: f64,
}

/// Solve `pi/sqrt(l1 - a) - pi/sqrt(l2 - a) = T1 - T2` for `a` (the pair fit
/// of the scattering profile), by bisection below `min(l1, l2)`.
fn pair_fit(t1: f64, l1: f64, t2: f64, l2: f64) -> Option<f64> {
    // T2 > T1 requires l2 < l1 for a monotone profile.
    if !(l1 > l2) || !(t2 > t1) {
        return None;
    }
    let target = t2 - t1;
    let g = |a: f64| -> f64 {
        let pi = std::f64::consts::PI;
        pi / (l2 - a).sqrt() - pi / (l1 - a).sqrt() - target
    };
    // g is increasing in a (both gaps shrink, the first faster); bracket
    // between -big and just under l2.
    let mut hi = l2 - 1e-12;
    let mut lo = l2 - 10.0 * (l1 - l2).max(1.0);
    if g(lo) > 0.0 || g(hi) < 0.0 {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if g(m) >= 0.0 {
            hi = m;
        } else {
            lo = m;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Estimate the bottom of the `L^2` spectrum from a schedule of truncation
/// radii.
pub fn lambda0_estimate(metric: &WarpedMetric, schedule: &[f64]) -> Result<Lambda0Estimate> {
    if schedule.len() < 3 {
        return Err(Error::invalid("need at least 3 truncation radii"));
    }
    let mut ts = schedule.to_vec();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for &t in &ts {
        check_truncation(metric, t)?;
    }
    let t_last = *ts.last().unwrap();
    let threshold = essential_threshold(metric.n);

    let eigen = shoot_eigenvalues(metric, t_last, 1e-8)?;
    let mut truncation_values = Vec::with_capacity(ts.len());
    for &t in &ts {
        let cells = ((t - metric.grid.t_min) * 150.0).round().max(600.0) as usize;
        let ev = dirichlet_eigenvalues(metric, t, 1, cells)?;
        truncation_values.push((t, ev[0].value));
    }

    if let Some(&lowest) = eigen.first() {
        // Confirm against the Dirichlet value at the largest truncation:
        // Dirichlet truncation over-estimates and converges to the true
        // eigenvalue exponentially.
        let dir = truncation_values.last().unwrap().1;
        return Ok(Lambda0Estimate {
            value: lowest,
            error: (dir - lowest).abs().max(1e-8),
            method: Lambda0Method::ShootingEigenvalue,
            truncation_values,
            essential_threshold: threshold,
        });
    }

    // Threshold case: fit a + pi^2/(T + delta)^2 on consecutive pairs.
    let mut fits = Vec::new();
    for w in truncation_values.windows(2) {
        if let Some(a) = pair_fit(w[0].0, w[0].1, w[1].0, w[1].1) {
            fits.push(a);
        }
    }
    if fits.is_empty() {
        return Err(Error::diagnostic(
            "truncated eigenvalues do not follow the threshold scattering profile",
        ));
    }
    let value = *fits.last().unwrap();
    let spread = fits
        .iter()
        .map(|a| (a - value).abs())
        .fold(0.0f64, f64::max);
    Ok(Lambda0Estimate {
        value,
        error: spread.max(1e-8),
        method: Lambda0Method::ThresholdFit,
        truncation_values,
        essential_threshold: threshold,
    })
}
