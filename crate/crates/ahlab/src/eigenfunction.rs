//! The distinguished growing eigenfunction `Delta u = -(n+1) u` and the
//! spectral certificate built from it.
//!
//! On an asymptotically hyperbolic Einstein (n+1)-manifold the equation
//! `u'' + (V'/V) u' - (n+1) u = 0` has a unique rotationally invariant
//! solution with `u ~ 1/r` for the geodesic defining function `r = 2 e^{-t}`.
//! Writing `u = r^{-1} + beta r + w` with `beta = R^/(4n(n-1))` (the boundary
//! scalar curvature in the same gauge) leaves a decaying correction `w`,
//! solved from a tridiagonal boundary-value problem:
//!
//! * pole: `w'(t_min) = -(d/dt)(r^{-1} + beta r)` so that `u'(t_min) = 0`;
//! * outer edge: `w' + (n+1) w = 0`, selecting the decaying indicial mode
//!   (the roots of the linearized operator at infinity are `1` and `-(n+1)`).
//!   For `n = 1` there is no curvature-determined `beta`, the `r` mode stays
//!   in `w`, and the outer condition becomes `w' + w = 0`.
//!
//! Downstream quantities:
//!
//! * `v = (u - r^{-1})/r`, whose boundary limit is `beta`;
//! * `G = |du|^2 - u^2`, computed in the cancellation-free product form
//!   `(u' - u)(u' + u)` with the ansatz part exact; its boundary limit is
//!   `-4 beta = -R^/(n(n-1))`;
//! * the Bochner-type identity `Delta G = -2 (Ric(dt,dt) + n) u'^2 - 2 |b|^2`
//!   with `b` the trace-free Hessian of `u` (diagnostic for Einstein inputs);
//! * the certificate `phi = u^{-s}`: `Delta phi / phi = s(n+1) - s(s+1)
//!   (u'/u)^2`, and `inf Delta phi / phi >= s(n-s)` certifies
//!   `lambda_0 >= s(n-s)` by the positive-supersolution criterion.

use serde::{Deserialize, Serialize};

use crate::extrapolate::{self, Limit};
use crate::fd;
use crate::geometry::{self, GaugePolicy, WarpedMetric};
use crate::tridiag;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenfunctionReport {
    /// Grid points (copy of the metric grid).
    pub points: Vec<f64>,
    pub u: Vec<f64>,
    /// Decaying correction `w = u - r^{-1} - beta r`.
    pub w: Vec<f64>,
    /// `u'`, assembled from the exact ansatz derivative plus `w'`.
    pub du: Vec<f64>,
    pub beta: f64,
    /// Boundary scalar curvature in the `r = 2 e^{-t}` gauge.
    pub boundary_scalar: f64,
    /// Relative residual of the discrete linear system (solver contract).
    pub residual: f64,
    /// Normalized residual of the continuous equation under the crate's
    /// 4th-order stencil (diagnostic; limited by the stencil, not the solve).
    pub fd_residual: f64,
    /// Max discrepancy between two algorithmically independent tridiagonal
    /// solvers, normalized; a uniqueness/conditioning probe.
    pub uniqueness_defect: f64,
    /// Boundary limit of `v = (u - r^{-1})/r` (should reproduce `beta`).
    pub v_limit: Limit,
    /// Boundary limit of `G = |du|^2 - u^2` (should be `-4 beta`).
    pub g_limit: Limit,
}

/// The fixed defining-function gauge for the growth solve, `r = 2 e^{-t}`.
pub fn defining_r(t: f64) -> f64 {
    2.0 * (-t).exp()
}

/// Solve for the growth-normalized eigenfunction.
pub fn solve(metric: &WarpedMetric) -> Result<EigenfunctionReport> {
    if !metric.origin_closure {
        return Err(Error::invalid(
            "eigenfunction solve requires a metric closing smoothly at the pole",
        ));
    }
    if !metric.is_asymptotically_hyperbolic() {
        return Err(Error::diagnostic(
            "eigenfunction normalization needs an asymptotically hyperbolic metric",
        ));
    }
    let n = metric.n;
    let nf = n as f64;
    let ts = &metric.grid.points;
    let npts = ts.len();
    if npts < 16 {
        return Err(Error::diagnostic("grid too coarse for the eigenfunction solve"));
    }

    let ci = geometry::conformal_infinity(metric, GaugePolicy::Scale(2.0))?;
    let rhat = geometry::boundary_scalar(&ci.metric)?;
    // A 1-dimensional boundary has no scalar curvature; the correction term
    // is absent and the raw limits are still reported.
    let beta = if n > 1 { rhat / (4.0 * nf * (nf - 1.0)) } else { 0.0 };

    // Ansatz A = r^{-1} + beta r; A' = r^{-1} - beta r; A'' = A (exact,
    // since r' = -r).
    let a_val = |t: f64| 1.0 / defining_r(t) + beta * defining_r(t);
    let a_der = |t: f64| 1.0 / defining_r(t) - beta * defining_r(t);

    // Assemble rows: 3-node stencils, boundary rows reduced to tridiagonal
    // by exact elimination with the adjacent interior row.
    let mut sub = vec![0.0; npts];
    let mut diag = vec![0.0; npts];
    let mut sup = vec![0.0; npts];
    let mut rhs = vec![0.0; npts];

    // Interior rows j = 1..npts-2: w'' + D w' - (n+1) w = nA - D A'.
    let interior_row = |j: usize| -> ([f64; 3], f64) {
        let nodes = [ts[j - 1], ts[j], ts[j + 1]];
        let wts = fd::fornberg_weights(ts[j], &nodes, 2);
        let d = metric.log_volume_deriv_at(ts[j]);
        let mut row = [0.0; 3];
        for m in 0..3 {
            row[m] = wts[2][m] + d * wts[1][m];
        }
        row[1] -= nf + 1.0;
        let r = nf * a_val(ts[j]) - d * a_der(ts[j]);
        (row, r)
    };
    for j in 1..npts - 1 {
        let (row, r) = interior_row(j);
        sub[j] = row[0];
        diag[j] = row[1];
        sup[j] = row[2];
        rhs[j] = r;
    }

    // Pole row: w'(t0) = -A'(t0), one-sided 3-point, then eliminate the
    // third entry against the j = 1 interior row.
    {
        let wts = fd::fornberg_weights(ts[0], &ts[0..3], 1);
        let mut row = [wts[1][0], wts[1][1], wts[1][2]];
        let mut r = -a_der(ts[0]);
        let (row1, r1) = interior_row(1);
        let factor = row[2] / row1[2];
        for m in 0..3 {
            row[m] -= factor * row1[m];
        }
        r -= factor * r1;
        diag[0] = row[0];
        sup[0] = row[1];
        rhs[0] = r;
        debug_assert!(row[2].abs() < 1e-9 * (row[0].abs() + row[1].abs() + 1.0));
    }

    // Outer row: w' + q w = 0, one-sided 3-point backward, eliminated
    // against the j = npts-2 interior row. For n >= 2 the slowest mode left
    // in w decays like r^{n+1} (q = n+1); for n = 1 the undetermined beta
    // component sits in w itself and decays like r (q = 1).
    {
        let q = if metric.n == 1 { 1.0 } else { nf + 1.0 };
        let wts = fd::fornberg_weights(ts[npts - 1], &ts[npts - 3..npts], 1);
        let mut row = [wts[1][0], wts[1][1], wts[1][2]];
        row[2] += q;
        let mut r = 0.0;
        let (row1, r1) = interior_row(npts - 2);
        let factor = row[0] / row1[0];
        for m in 0..3 {
            row[m] -= factor * row1[m];
        }
        r -= factor * r1;
        sub[npts - 1] = row[1];
        diag[npts - 1] = row[2];
        rhs[npts - 1] = r;
        debug_assert!(row[0].abs() < 1e-9 * (row[1].abs() + row[2].abs() + 1.0));
    }

    let w = tridiag::thomas_solve(&sub, &diag, &sup, &rhs);
    let w_alt = tridiag::pivoting_solve(&sub, &diag, &sup, &rhs);
    let w_scale = w.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1.0);
    let uniqueness_defect = w
        .iter()
        .zip(&w_alt)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max)
        / w_scale;

    // Relative residual of the discrete system, row by row.
    let mut residual = 0.0f64;
    for j in 0..npts {
        let mut ax = diag[j] * w[j];
        let mut scale = diag[j].abs() * w[j].abs() + rhs[j].abs();
        if j > 0 {
            ax += sub[j] * w[j - 1];
            scale += sub[j].abs() * w[j - 1].abs();
        }
        if j + 1 < npts {
            ax += sup[j] * w[j + 1];
            scale += sup[j].abs() * w[j + 1].abs();
        }
        residual = residual.max((ax - rhs[j]).abs() / scale.max(1.0));
    }

    // Assemble u and u'.
    let dw = fd::derivative(ts, &w, 1);
    let u: Vec<f64> = ts.iter().zip(&w).map(|(&t, &wj)| a_val(t) + wj).collect();
    let du: Vec<f64> = ts
        .iter()
        .zip(&dw)
        .map(|(&t, &dwj)| a_der(t) + dwj)
        .collect();

    // Continuous-equation residual under the default stencil, normalized by
    // the local solution scale.
    let ddu = fd::derivative(ts, &du, 1);
    let mut fd_residual = 0.0f64;
    for j in fd::centered_interior(npts) {
        if ts[j] <= metric.grid.t_min + 1e-12 {
            continue;
        }
        let d = metric.log_volume_deriv_at(ts[j]);
        let res = ddu[j] + d * du[j] - (nf + 1.0) * u[j];
        let scale = 1.0 + ddu[j].abs() + (d * du[j]).abs() + ((nf + 1.0) * u[j]).abs();
        fd_residual = fd_residual.max(res.abs() / scale);
    }

    // Boundary limits, anchored away from the outer edge where the FD noise
    // in w' is amplified by 1/r.
    let cut = ts
        .partition_point(|&t| t <= metric.grid.t_max - 2.0)
        .max(8)
        .min(npts);
    let v: Vec<f64> = ts
        .iter()
        .zip(&w)
        .map(|(&t, &wj)| beta + wj / defining_r(t))
        .collect();
    let v_limit = extrapolate::boundary_limit(&ts[..cut], &v[..cut], 1e-3)
        .ok_or_else(|| Error::diagnostic("v = (u - 1/r)/r does not extrapolate to the boundary"))?;
    let g = g_field(metric, beta, &w, &dw);
    let g_limit = extrapolate::boundary_limit(&ts[..cut], &g[..cut], 1e-3)
        .ok_or_else(|| Error::diagnostic("|du|^2 - u^2 does not extrapolate to the boundary"))?;

    Ok(EigenfunctionReport {
        points: ts.clone(),
        u,
        w,
        du,
        beta,
        boundary_scalar: rhat,
        residual,
        fd_residual,
        uniqueness_defect,
        v_limit,
        g_limit,
    })
}

/// `G = |du|^2 - u^2` in the product form `(u' - u)(u' + u)`; the ansatz
/// contributions are exact (`A' - A = -2 beta r`, `A' + A = 2/r`), so the
/// huge `e^{2t}` terms never meet in a subtraction.
fn g_field(metric: &WarpedMetric, beta: f64, w: &[f64], dw: &[f64]) -> Vec<f64> {
    metric
        .grid
        .points
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let r = defining_r(t);
            let minus = -2.0 * beta * r + (dw[j] - w[j]);
            let plus = 2.0 / r + (dw[j] + w[j]);
            minus * plus
        })
        .collect()
}

/// Residuals of the Bochner-type identity for `G = |du|^2 - u^2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubharmonicityReport {
    /// Sup of `|Delta G + 2 (Ric_tt + n) u'^2 + 2 |b|^2|`, normalized by
    /// `1 + |du|^2 + u^2` pointwise.
    pub identity_residual: f64,
    /// Max of `Delta G` over the interior (non-positive for Einstein
    /// metrics, up to discretization).
    pub max_laplacian_g: f64,
}

/// Check `Delta G = -2 (Ric(dt,dt) + n) u'^2 - 2 |b|^2` where `b` is the
/// trace-free part of `Hess u` (using `Delta u = -(n+1) u` to express the
/// Hessian through first derivatives).
pub fn subharmonicity_check(
    metric: &WarpedMetric,
    rep: &EigenfunctionReport,
) -> Result<SubharmonicityReport> {
    let ts = &metric.grid.points;
    let npts = ts.len();
    let nf = metric.n as f64;
    let curv = geometry::curvature(metric)?;

    let dw = fd::derivative(ts, &rep.w, 1);
    let g = g_field(metric, rep.beta, &rep.w, &dw);
    let dg = fd::derivative(ts, &g, 1);
    let ddg = fd::derivative(ts, &dg, 1);

    let k = metric.profiles.len();
    let values: Vec<Vec<f64>> = (0..k).map(|i| metric.profile_values(i)).collect();
    let derivs: Vec<Vec<f64>> = (0..k).map(|i| metric.profile_derivs(i)).collect();

    let mut identity_residual = 0.0f64;
    let mut max_lap_g = f64::NEG_INFINITY;
    for j in fd::centered_interior(npts) {
        if ts[j] <= metric.grid.t_min + 0.05 {
            continue;
        }
        let d = metric.log_volume_deriv_at(ts[j]);
        let lap_g = -(ddg[j] + d * dg[j]);
        let (u, du) = (rep.u[j], rep.du[j]);
        // Hessian of u in the orthonormal frame: Hess_tt = u'', and
        // L_d u' on the slice directions; u'' from the equation.
        let upp = (nf + 1.0) * u - d * du;
        let b_tt = upp - u;
        let mut b2 = b_tt * b_tt;
        for &pi in &metric.assignment {
            let l = derivs[pi][j] / values[pi][j];
            let b_dd = l * du - u;
            b2 += b_dd * b_dd;
        }
        let ric_tt = curv.ricci_eigenvalues[j][0];
        let res = lap_g + 2.0 * (ric_tt + nf) * du * du + 2.0 * b2;
        let scale = 1.0 + du * du + u * u;
        identity_residual = identity_residual.max(res.abs() / scale);
        max_lap_g = max_lap_g.max(lap_g / scale);
    }
    Ok(SubharmonicityReport {
        identity_residual,
        max_laplacian_g: max_lap_g,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub s: f64,
    /// The bound being certified, `s (n - s)`.
    pub bound: f64,
    /// `inf_t Delta phi / phi` over the grid interior.
    pub inf_rayleigh: f64,
    pub certified: bool,
}

/// Certify `lambda_0 >= s(n-s)` from the positivity of
/// `Delta(u^{-s})/u^{-s} = s(n+1) - s(s+1) (u'/u)^2`.
///
/// The certificate presumes `u > 0` (checked) and the standard
/// positive-supersolution characterization of the bottom of the spectrum.
pub fn certificate(
    metric: &WarpedMetric,
    rep: &EigenfunctionReport,
    s: f64,
    tol: f64,
) -> Result<CertificateReport> {
    let nf = metric.n as f64;
    if !(s > 0.0 && s <= nf / 2.0) {
        return Err(Error::invalid("certificate weight must satisfy 0 < s <= n/2"));
    }
    if rep.u.iter().any(|&u| !(u > 0.0)) {
        return Err(Error::diagnostic(
            "eigenfunction is not positive; certificate does not apply",
        ));
    }
    let mut inf = f64::INFINITY;
    for j in 0..rep.u.len() {
        let ratio = rep.du[j] / rep.u[j];
        inf = inf.min(s * (nf + 1.0) - s * (s + 1.0) * ratio * ratio);
    }
    let bound = s * (nf - s);
    Ok(CertificateReport {
        s,
        bound,
        inf_rayleigh: inf,
        certified: inf >= bound - tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_hyperbolic;
    use crate::grid::RadialGrid;
    use approx::assert_relative_eq;

    fn h4() -> WarpedMetric {
        make_hyperbolic(3, RadialGrid::uniform(0.0, 10.0, 2001).unwrap()).unwrap()
    }

    #[test]
    fn hyperbolic_eigenfunction_is_cosh() {
        // On H^4, u = cosh t = 1/r + r/4 exactly, so w vanishes.
        let rep = solve(&h4()).unwrap();
        assert_relative_eq!(rep.beta, 0.25, epsilon = 1e-8);
        let wmax = rep.w.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        assert!(wmax < 1e-8, "w sup {wmax}");
        for (j, &t) in rep.points.iter().enumerate() {
            assert_relative_eq!(rep.u[j], t.cosh(), max_relative = 1e-8);
        }
        assert!(rep.residual < 1e-10, "residual {}", rep.residual);
        assert!(rep.uniqueness_defect < 1e-10);
    }

    #[test]
    fn hyperbolic_limits() {
        let rep = solve(&h4()).unwrap();
        assert_relative_eq!(rep.v_limit.value, 0.25, epsilon = 1e-6);
        assert_relative_eq!(rep.g_limit.value, -1.0, epsilon = 1e-6);
    }

    #[test]
    fn hyperbolic_subharmonicity_identity() {
        let m = h4();
        let rep = solve(&m).unwrap();
        let sub = subharmonicity_check(&m, &rep).unwrap();
        assert!(sub.identity_residual < 1e-6, "residual {}", sub.identity_residual);
        assert!(sub.max_laplacian_g < 1e-6, "max lap G {}", sub.max_laplacian_g);
    }

    #[test]
    fn hyperbolic_certificate_at_half_n() {
        let m = h4();
        let rep = solve(&m).unwrap();
        let cert = certificate(&m, &rep, 1.5, 1e-6).unwrap();
        assert!(cert.certified);
        assert_relative_eq!(cert.bound, 2.25);
        assert_relative_eq!(cert.inf_rayleigh, 2.25, epsilon = 1e-4);
    }

    #[test]
    fn certificate_rejects_bad_weight() {
        let m = h4();
        let rep = solve(&m).unwrap();
        assert!(certificate(&m, &rep, 2.0, 1e-6).is_err());
        assert!(certificate(&m, &rep, -0.1, 1e-6).is_err());
    }

    #[test]
    fn truncated_metric_rejected() {
        let p = crate::geometry::Profile::expr("sinh(t)", 3).unwrap();
        let m = crate::geometry::WarpedMetric::new(
            3,
            RadialGrid::uniform(1.0, 10.0, 901).unwrap(),
            vec![p],
            false,
            crate::geometry::BoundaryStructure::Round { dim: 3 },
        )
        .unwrap();
        assert!(solve(&m).is_err());
    }
}
