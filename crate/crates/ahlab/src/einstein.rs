//! Biaxial Einstein metrics on the 4-ball by shooting from the pole.
//!
//! Ansatz: `g = dt^2 + a(t)^2 (sigma_1^2 + sigma_2^2) + c(t)^2 sigma_3^2`
//! over the calibrated su(2) coframe. The Einstein condition `Ric = -3 g`
//! reduces to
//!
//! ```text
//! a''/a = 4/a^2 - 2 c^2/a^4 - (a'/a)^2 - a'c'/(a c) + 3
//! c''/c = 2 c^2/a^4       - 2 a'c'/(a c)            + 3
//! ```
//!
//! with the first-order Gauss constraint
//! `(tr L)^2 - tr(L^2) - R_slice = 6` (`L` the shape operator, `R_slice`
//! the orbit scalar curvature `8/a^2 - 2c^2/a^4`), which the integrator does
//! not enforce and which therefore serves as an independent accuracy monitor.
//!
//! Smooth closure at the pole forces `a, c ~ t`; the one-parameter family of
//! solutions is coordinatized by `p` through `a = t + (1/6 + p) t^3 + ...`,
//! with the remaining Taylor coefficients determined recursively. `p = 0` is
//! the round hyperbolic metric; other values produce the Berger-sphere
//! conformal infinities of the biaxial family (or pinch off at finite time).

use serde::{Deserialize, Serialize};

use crate::extrapolate;
use crate::geometry::{
    self, BoundaryStructure, Profile, ProfileBacking, StructureConstants, WarpedMetric, YamabeSign,
};
use crate::eigenfunction::CertificateReport;
use crate::grid::RadialGrid;
use crate::ode::{self, OdeOptions};
use crate::spectrum::Lambda0Estimate;
use crate::{Error, Result};

/// Pole Taylor data: `a = t + alpha t^3 + a5 t^5 + a7 t^7`,
/// `c = t + gamma t^3 + c5 t^5 + c7 t^7`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PoleSeries {
    pub alpha: f64,
    pub gamma: f64,
    pub a5: f64,
    pub c5: f64,
    pub a7: f64,
    pub c7: f64,
}

impl PoleSeries {
    /// Coefficients determined by the shooting parameter `p` (`alpha = 1/6 + p`).
    pub fn new(p: f64) -> PoleSeries {
        let alpha = 1.0 / 6.0 + p;
        let gamma = 0.5 - 2.0 * alpha;
        let c5 = (6.0 * alpha * alpha - 7.5 * alpha * gamma + 3.0 * gamma * gamma) / 5.0;
        let a5 = (1.5 * alpha * gamma - c5) / 4.0;
        let p7 = 12.0 * a5 * alpha + 8.0 * a5 * gamma + 20.0 * alpha.powi(3)
            - 36.0 * alpha * alpha * gamma
            + 8.0 * alpha * c5
            + 12.0 * alpha * gamma * gamma
            + 2.0 * c5 * gamma
            - 2.0 * gamma.powi(3);
        let q7 = 52.0 * a5 * alpha - 32.0 * a5 * gamma - 44.0 * alpha.powi(3)
            + 48.0 * alpha * alpha * gamma
            - 32.0 * alpha * c5
            + 42.0 * c5 * gamma
            - 10.0 * gamma.powi(3);
        let a7 = (5.0 * p7 - q7) / 280.0;
        let c7 = (p7 - 60.0 * a7) / 10.0;
        PoleSeries {
            alpha,
            gamma,
            a5,
            c5,
            a7,
            c7,
        }
    }

    /// `(a, a', c, c')` at radius `t` (valid for small `t`).
    pub fn eval(&self, t: f64) -> [f64; 4] {
        let t2 = t * t;
        let a = t * (1.0 + t2 * (self.alpha + t2 * (self.a5 + t2 * self.a7)));
        let da = 1.0 + t2 * (3.0 * self.alpha + t2 * (5.0 * self.a5 + t2 * 7.0 * self.a7));
        let c = t * (1.0 + t2 * (self.gamma + t2 * (self.c5 + t2 * self.c7)));
        let dc = 1.0 + t2 * (3.0 * self.gamma + t2 * (5.0 * self.c5 + t2 * 7.0 * self.c7));
        [a, da, c, dc]
    }
}

fn rhs(y: &[f64]) -> Vec<f64> {
    let (a, da, c, dc) = (y[0], y[1], y[2], y[3]);
    let la = da / a;
    let lc = dc / c;
    let w = c * c / (a * a * a * a);
    let app = a * (4.0 / (a * a) - 2.0 * w - la * la - la * lc + 3.0);
    let cpp = c * (2.0 * w - 2.0 * la * lc + 3.0);
    vec![da, app, dc, cpp]
}

/// Violation of the Gauss constraint `(tr L)^2 - tr L^2 - R_slice = 6`.
fn constraint_defect(y: &[f64]) -> f64 {
    let (a, da, c, dc) = (y[0], y[1], y[2], y[3]);
    let la = da / a;
    let lc = dc / c;
    let tr = 2.0 * la + lc;
    let tr2 = 2.0 * la * la + lc * lc;
    let r_slice = 8.0 / (a * a) - 2.0 * c * c / (a * a * a * a);
    // Relative to the size of the cancelling terms: near the pole they grow
    // like 1/t^2 and would otherwise amplify harmless rounding noise.
    (tr * tr - tr2 - r_slice - 6.0).abs() / (tr * tr).max(1.0)
}

/// How a shot ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShootOutcome {
    /// Reached `t_max` with `a'/a, c'/c -> 1`: an asymptotically hyperbolic
    /// Einstein metric.
    Complete,
    /// A profile collapsed at the given radius.
    Pinched { t: f64 },
    /// The solution left the trust region (profile or velocity blow-up).
    Escaped { t: f64 },
    /// Reached `t_max` but the asymptotic-hyperbolicity diagnostic failed.
    NotAsymptoticallyHyperbolic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShootReport {
    pub parameter: f64,
    pub outcome: ShootOutcome,
    /// The metric, on a uniform grid, when the shot completed.
    pub metric: Option<WarpedMetric>,
    /// Berger parameter of the conformal infinity, `lim (c/a)^2`.
    pub berger_parameter: Option<f64>,
    /// Sup of `|Rc + 3 g|` measured independently by the curvature module.
    pub einstein_residual: Option<f64>,
    /// Largest Gauss-constraint drift along the trajectory.
    pub constraint_drift: f64,
}

/// Radius where the pole series is handed to the adaptive integrator.
pub const SERIES_HANDOFF: f64 = 1e-3;

/// Shoot the biaxial Einstein system from the pole.
///
/// `points` is the size of the uniform output grid on `[0, t_max]`; the
/// integrator lands on each node exactly, so the stored samples carry no
/// interpolation error.
pub fn shoot(p: f64, t_max: f64, points: usize) -> Result<ShootReport> {
    if !(t_max > 1.0) || points < 64 {
        return Err(Error::invalid("need t_max > 1 and at least 64 grid points"));
    }
    let grid = RadialGrid::uniform(0.0, t_max, points)?;
    let series = PoleSeries::new(p);
    let opts = OdeOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        h_init: 1e-4,
        h_max: 0.05,
        ..OdeOptions::default()
    };

    let mut t = SERIES_HANDOFF;
    let mut y = series.eval(t).to_vec();
    let mut drift = constraint_defect(&y);
    let npts = grid.len();
    let mut a_v = vec![0.0; npts];
    let mut da_v = vec![0.0; npts];
    let mut c_v = vec![0.0; npts];
    let mut dc_v = vec![0.0; npts];
    a_v[0] = 0.0;
    da_v[0] = 1.0;
    c_v[0] = 0.0;
    dc_v[0] = 1.0;

    let mut failure: Option<ShootOutcome> = None;
    let escape = |y: &[f64]| {
        y[0].min(y[2]) < 1e-9
            || y.iter().any(|v| !v.is_finite() || v.abs() > 1e9)
            || y[0] / y[2] > 1e6
            || y[2] / y[0] > 1e6
    };
    'nodes: for j in 1..npts {
        let target = grid.points[j];
        if target <= t {
            let s = series.eval(target);
            a_v[j] = s[0];
            da_v[j] = s[1];
            c_v[j] = s[2];
            dc_v[j] = s[3];
            continue;
        }
        let traj = ode::integrate(|_, y| rhs(y), t, &y, target, &opts, |_, y| escape(y))?;
        let last = traj.samples.last().unwrap();
        if traj.stopped_early || last.t < target {
            let pinch = last.y[0].min(last.y[2]) < 1e-6;
            failure = Some(if pinch {
                ShootOutcome::Pinched { t: last.t }
            } else {
                ShootOutcome::Escaped { t: last.t }
            });
            break 'nodes;
        }
        t = last.t;
        y = last.y.clone();
        drift = drift.max(constraint_defect(&y));
        a_v[j] = y[0];
        da_v[j] = y[1];
        c_v[j] = y[2];
        dc_v[j] = y[3];
    }

    if let Some(outcome) = failure {
        return Ok(ShootReport {
            parameter: p,
            outcome,
            metric: None,
            berger_parameter: None,
            einstein_residual: None,
            constraint_drift: drift,
        });
    }

    let profiles = vec![
        Profile {
            backing: ProfileBacking::Samples {
                values: a_v.clone(),
                derivs: Some(da_v.clone()),
            },
            multiplicity: 2,
        },
        Profile {
            backing: ProfileBacking::Samples {
                values: c_v.clone(),
                derivs: Some(dc_v.clone()),
            },
            multiplicity: 1,
        },
    ];
    let metric = WarpedMetric::new(
        3,
        grid,
        profiles,
        true,
        BoundaryStructure::Lie(StructureConstants::su2_calibrated()),
    )?;

    if !metric.is_asymptotically_hyperbolic() {
        return Ok(ShootReport {
            parameter: p,
            outcome: ShootOutcome::NotAsymptoticallyHyperbolic,
            metric: None,
            berger_parameter: None,
            einstein_residual: None,
            constraint_drift: drift,
        });
    }

    // Berger parameter of the conformal infinity: (c/a)^2 has a boundary
    // limit; extrapolate it directly (gauge-independent).
    let ratio: Vec<f64> = (1..npts)
        .map(|j| (c_v[j] / a_v[j]) * (c_v[j] / a_v[j]))
        .collect();
    let berger = extrapolate::boundary_limit(&metric.grid.points[1..], &ratio, 1e-3)
        .ok_or_else(|| Error::diagnostic("(c/a)^2 does not extrapolate to the boundary"))?;

    let curv = geometry::curvature(&metric)?;
    Ok(ShootReport {
        parameter: p,
        outcome: ShootOutcome::Complete,
        berger_parameter: Some(berger.value),
        einstein_residual: Some(curv.einstein_residual),
        metric: Some(metric),
        constraint_drift: drift,
    })
}

/// Find the shooting parameter whose conformal infinity has the given Berger
/// parameter, by bisection between two parameters that bracket it.
pub fn solve_for_berger(
    target: f64,
    mut p_lo: f64,
    mut p_hi: f64,
    t_max: f64,
    points: usize,
    tol: f64,
) -> Result<ShootReport> {
    let value = |p: f64| -> Result<f64> {
        let rep = shoot(p, t_max, points)?;
        rep.berger_parameter.ok_or_else(|| {
            Error::diagnostic(format!(
                "shot at p = {p} did not complete ({:?}); bracket is invalid",
                rep.outcome
            ))
        })
    };
    let mut f_lo = value(p_lo)? - target;
    let f_hi = value(p_hi)? - target;
    if f_lo * f_hi > 0.0 {
        return Err(Error::invalid(
            "bracket does not straddle the target Berger parameter",
        ));
    }
    while (p_hi - p_lo).abs() > tol {
        let mid = 0.5 * (p_lo + p_hi);
        let fm = value(mid)? - target;
        if f_lo * fm <= 0.0 {
            p_hi = mid;
        } else {
            p_lo = mid;
            f_lo = fm;
        }
    }
    shoot(0.5 * (p_lo + p_hi), t_max, points)
}

/// One row of the Einstein-family survey: shoot, then cross-validate the
/// accepted metric against the boundary and spectral modules.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub outcome: ShootOutcome,
    pub berger_parameter: Option<f64>,
    /// Scalar curvature of the conformal infinity (scale-2 gauge).
    pub boundary_scalar: Option<f64>,
    pub yamabe: Option<YamabeSign>,
    pub einstein_residual: Option<f64>,
    pub lambda0: Option<Lambda0Estimate>,
    /// Point spectrum found below `n^2/4` on the deepest truncation.
    pub eigenvalues_below_threshold: Vec<f64>,
    /// Boundary limit of `|du|^2 - u^2` and its Einstein prediction
    /// `-R^/(n(n-1))`.
    pub gradient_defect_boundary: Option<f64>,
    pub gradient_defect_expected: Option<f64>,
    pub certificate: Option<CertificateReport>,
    /// Per-stage diagnostics; a row with failures still carries whatever
    /// stages succeeded.
    pub failures: Vec<String>,
}

/// Build one survey row. Stage failures are recorded, not fatal.
pub fn sweep_row(p: f64, t_max: f64, points: usize) -> Result<SweepRow> {
    let rep = shoot(p, t_max, points)?;
    let mut row = SweepRow {
        parameter: p,
        outcome: rep.outcome.clone(),
        berger_parameter: rep.berger_parameter,
        boundary_scalar: None,
        yamabe: None,
        einstein_residual: rep.einstein_residual,
        lambda0: None,
        eigenvalues_below_threshold: Vec::new(),
        gradient_defect_boundary: None,
        gradient_defect_expected: None,
        certificate: None,
        failures: Vec::new(),
    };
    let metric = match rep.metric {
        Some(m) => m,
        None => {
            row.failures.push(format!("shot did not complete: {:?}", rep.outcome));
            return Ok(row);
        }
    };

    match geometry::conformal_infinity(&metric, geometry::GaugePolicy::Scale(2.0)) {
        Ok(ci) => {
            match geometry::boundary_scalar(&ci.metric) {
                Ok(r_hat) => {
                    row.boundary_scalar = Some(r_hat);
                    let nf = metric.n as f64;
                    row.gradient_defect_expected = Some(-r_hat / (nf * (nf - 1.0)));
                }
                Err(e) => row.failures.push(format!("boundary scalar: {e}")),
            }
            match geometry::yamabe_sign(&ci.metric) {
                Ok(ys) => row.yamabe = Some(ys),
                Err(e) => row.failures.push(format!("yamabe sign: {e}")),
            }
        }
        Err(e) => row.failures.push(format!("conformal infinity: {e}")),
    }

    let radii: Vec<f64> = [0.62, 0.73, 0.84, 0.95]
        .iter()
        .map(|f| f * t_max)
        .collect();
    match crate::spectrum::lambda0_estimate(&metric, &radii) {
        Ok(est) => row.lambda0 = Some(est),
        Err(e) => row.failures.push(format!("lambda0: {e}")),
    }
    match crate::spectrum::shoot_eigenvalues(&metric, 0.95 * t_max, 1e-8) {
        Ok(ev) => row.eigenvalues_below_threshold = ev,
        Err(e) => row.failures.push(format!("eigenvalue scan: {e}")),
    }

    match crate::eigenfunction::solve(&metric) {
        Ok(ef) => {
            row.gradient_defect_boundary = Some(ef.g_limit.value);
            let s = metric.n as f64 / 2.0;
            match crate::eigenfunction::certificate(&metric, &ef, s, 1e-6) {
                Ok(c) => row.certificate = Some(c),
                Err(e) => row.failures.push(format!("certificate: {e}")),
            }
        }
        Err(e) => row.failures.push(format!("eigenfunction: {e}")),
    }

    Ok(row)
}

/// Survey the Einstein family over a parameter schedule; rows are sorted by
/// the Berger parameter of the conformal infinity (failed extractions last).
pub fn pedersen_sweep(schedule: &[f64], t_max: f64, points: usize) -> Result<Vec<SweepRow>> {
    if schedule.is_empty() {
        return Err(Error::invalid("empty parameter schedule"));
    }
    let mut rows = schedule
        .iter()
        .map(|&p| sweep_row(p, t_max, points))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| match (a.berger_parameter, b.berger_parameter) {
        (Some(x), Some(y)) => x.partial_cmp(&y).unwrap(),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.parameter.partial_cmp(&b.parameter).unwrap(),
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn series_at_zero_parameter_is_sinh() {
        let s = PoleSeries::new(0.0);
        assert_relative_eq!(s.alpha, 1.0 / 6.0);
        assert_relative_eq!(s.gamma, 1.0 / 6.0);
        assert_relative_eq!(s.a5, 1.0 / 120.0, epsilon = 1e-14);
        assert_relative_eq!(s.c5, 1.0 / 120.0, epsilon = 1e-14);
        assert_relative_eq!(s.a7, 1.0 / 5040.0, epsilon = 1e-12);
        assert_relative_eq!(s.c7, 1.0 / 5040.0, epsilon = 1e-12);
        for &t in &[0.01, 0.1, 0.3] {
            let [a, da, c, dc] = s.eval(t);
            assert_relative_eq!(a, t.sinh(), epsilon = 1e-10);
            assert_relative_eq!(da, t.cosh(), epsilon = 1e-8);
            assert_relative_eq!(c, t.sinh(), epsilon = 1e-10);
            assert_relative_eq!(dc, t.cosh(), epsilon = 1e-8);
        }
    }

    #[test]
    fn series_satisfies_field_equations() {
        // For several parameters, the Taylor polynomial must satisfy the
        // second-order system to the expected truncation order.
        for &p in &[0.0, 0.05, -0.04] {
            let s = PoleSeries::new(p);
            for &t in &[0.02, 0.05, 0.1] {
                let y = s.eval(t);
                let f = rhs(&y);
                // Numerical second derivative of the series itself.
                let h = 1e-5;
                let yp = s.eval(t + h);
                let ym = s.eval(t - h);
                let app = (yp[1] - ym[1]) / (2.0 * h);
                let cpp = (yp[3] - ym[3]) / (2.0 * h);
                assert_relative_eq!(f[1], app, epsilon = 1e-5 + 50.0 * t.powi(7));
                assert_relative_eq!(f[3], cpp, epsilon = 1e-5 + 50.0 * t.powi(7));
                assert!(constraint_defect(&y) < 1e-8 + 10.0 * t.powi(8));
            }
        }
    }

    #[test]
    fn zero_parameter_shot_is_hyperbolic_space() {
        let rep = shoot(0.0, 8.0, 1601).unwrap();
        assert_eq!(rep.outcome, ShootOutcome::Complete);
        let m = rep.metric.as_ref().unwrap();
        let a = m.profile_values(0);
        for (j, &t) in m.grid.points.iter().enumerate() {
            assert_relative_eq!(a[j], t.sinh(), epsilon = 1e-9, max_relative = 1e-9);
        }
        assert_relative_eq!(rep.berger_parameter.unwrap(), 1.0, epsilon = 1e-6);
        assert!(rep.einstein_residual.unwrap() < 1e-6);
        assert!(rep.constraint_drift < 1e-8, "drift {}", rep.constraint_drift);
    }

    #[test]
    fn invalid_arguments_rejected() {
        assert!(shoot(0.0, 0.5, 1000).is_err());
        assert!(shoot(0.0, 8.0, 10).is_err());
    }
}

#[cfg(test)]
mod family_tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn berger_parameter_closed_form() {
        // The family satisfies berger = 1/(1 + 12 p); derived independently
        // from the known one-parameter biaxial solutions.
        for &p in &[-0.05, -0.02, 0.02, 0.1] {
            let rep = shoot(p, 8.0, 1601).unwrap();
            assert_eq!(rep.outcome, ShootOutcome::Complete);
            assert_relative_eq!(
                rep.berger_parameter.unwrap(),
                1.0 / (1.0 + 12.0 * p),
                max_relative = 1e-4
            );
        }
    }

    #[test]
    fn family_breaks_down_past_critical_parameter() {
        // Beyond p = -1/12 there is no asymptotically hyperbolic member.
        let rep = shoot(-0.1, 8.0, 801).unwrap();
        assert!(matches!(
            rep.outcome,
            ShootOutcome::Escaped { .. } | ShootOutcome::Pinched { .. }
        ));
        assert!(rep.metric.is_none());
    }

    #[test]
    fn survey_cross_validates_rows() {
        let rows = pedersen_sweep(&[-0.03, 0.0], 10.0, 1001).unwrap();
        assert_eq!(rows.len(), 2);
        // Sorted by Berger parameter: the round case (1) comes first.
        assert_relative_eq!(rows[0].berger_parameter.unwrap(), 1.0, epsilon = 1e-6);
        let tb = rows[1].berger_parameter.unwrap();
        assert!(tb > 1.0 && tb < 4.0, "berger {tb}");
        for row in &rows {
            assert!(row.failures.is_empty(), "{:?}", row.failures);
            assert_eq!(row.yamabe, Some(YamabeSign::Positive));
            // Gradient-defect boundary value against its Einstein prediction.
            let got = row.gradient_defect_boundary.unwrap();
            let want = row.gradient_defect_expected.unwrap();
            assert_relative_eq!(got, want, epsilon = 1e-3);
            // Nonnegative Yamabe: certificate at s = n/2 succeeds and the
            // estimate sits at the essential threshold.
            assert!(row.certificate.as_ref().unwrap().certified);
            assert!(row.eigenvalues_below_threshold.is_empty());
            let l0 = row.lambda0.as_ref().unwrap();
            assert!((l0.value - 2.25).abs() <= l0.error.max(1e-3), "{l0:?}");
        }
        // Trend: lambda0 non-increasing in the Berger parameter.
        let a = rows[0].lambda0.as_ref().unwrap();
        let b = rows[1].lambda0.as_ref().unwrap();
        assert!(b.value <= a.value + a.error + b.error);
    }

    #[test]
    fn bisection_hits_target_berger() {
        let rep = solve_for_berger(2.0, -0.06, 0.0, 8.0, 801, 1e-6).unwrap();
        assert_relative_eq!(rep.berger_parameter.unwrap(), 2.0, epsilon = 2e-4);
    }
}
