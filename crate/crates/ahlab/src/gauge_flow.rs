//! Geodesic defining functions and Hölder continuity of flows.
//!
//! `geodesic_gauge` replaces a candidate defining function `rho` by the
//! geodesic one for the compactification: in the radial gauge the exact
//! answer is `r = C e^{-t}` with `C = lim e^t rho`, and `|dr|` with respect
//! to `r^2 g` is identically 1. The report carries the compatibility defect
//! `sup |r - rho| / rho^2`, which must stay bounded for `rho` to define the
//! same conformal representative.
//!
//! `flow_map` integrates an autonomous vector field given in closed form,
//! with an optional box domain (integration stops at the first exit).
//!
//! `holder_check` tests the Gronwall-type estimate for linear systems whose
//! coefficient matrix depends Hölder-continuously on a parameter: with
//! `A(x, t) = DV` along the flow line through `x`, solutions of
//! `u' = A(x, t) u` from a common initial vector satisfy
//!
//! ```text
//! |u(x1, t) - u(x2, t)| <= (exp(t ||A||_{C^{0,alpha}}) - 1) ||u||_inf |x1 - x2|^alpha
//! ```
//!
//! where the norm combines the sup norm of `A` and the Hölder seminorm in
//! `x` (both estimated by sampling along the trajectories). An empirical
//! Hölder exponent is fitted from a schedule of separations by log-log
//! regression.

use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::extrapolate;
use crate::geometry::WarpedMetric;
use crate::ode::{self, OdeOptions, Sample};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Geodesic gauge
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeodesicGaugeReport {
    /// `C = lim e^t rho`, the boundary scale of the input gauge.
    pub scale: f64,
    /// Geodesic defining function `r = C e^{-t}` on the grid.
    pub r: Vec<f64>,
    /// `sup |(r'/r)^2 - 1|`: the eikonal equation for `r^2 g` (identically
    /// zero in the radial gauge, reported as computed).
    pub eikonal_residual: f64,
    /// `sup |r - rho| / rho^2` over the grid: bounded iff the two gauges
    /// agree to second order at the boundary.
    pub compatibility_defect: f64,
}

/// Geodesic defining function matching `rho` at the boundary.
pub fn geodesic_gauge(metric: &WarpedMetric, rho: &Expr) -> Result<GeodesicGaugeReport> {
    let vars = rho.variables();
    if vars.iter().any(|v| v != "t") {
        return Err(Error::invalid("defining function may only depend on `t`"));
    }
    let ts = &metric.grid.points;
    let rho_v: Vec<f64> = ts.iter().map(|&t| rho.eval(t)).collect();
    if rho_v.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("defining function must be positive"));
    }
    let scaled: Vec<f64> = ts.iter().zip(&rho_v).map(|(&t, &r)| t.exp() * r).collect();
    let lim = extrapolate::boundary_limit(ts, &scaled, 1e-3).ok_or_else(|| {
        Error::diagnostic("e^t rho has no boundary limit; not a defining function for this gauge")
    })?;
    if !(lim.value > 0.0) {
        return Err(Error::diagnostic(
            "e^t rho tends to a non-positive limit; rho degenerates at the boundary",
        ));
    }
    let c = lim.value;
    let r: Vec<f64> = ts.iter().map(|&t| c * (-t).exp()).collect();

    // Eikonal residual for the geodesic gauge itself: (r'/r)^2 = 1 exactly,
    // but evaluate it rather than assert it.
    let eikonal = ts
        .iter()
        .map(|&t| {
            let rr = c * (-t).exp();
            let dr = -rr;
            ((dr / rr) * (dr / rr) - 1.0).abs()
        })
        .fold(0.0f64, f64::max);

    let defect = ts
        .iter()
        .zip(r.iter().zip(&rho_v))
        .map(|(_, (&ri, &pi))| (ri - pi).abs() / (pi * pi))
        .fold(0.0f64, f64::max);

    Ok(GeodesicGaugeReport {
        scale: c,
        r,
        eikonal_residual: eikonal,
        compatibility_defect: defect,
    })
}

// ---------------------------------------------------------------------------
// Flows
// ---------------------------------------------------------------------------

/// Autonomous vector field with closed-form components.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowField {
    /// Coordinate names, in component order.
    pub vars: Vec<String>,
    pub components: Vec<Expr>,
}

impl FlowField {
    pub fn new(vars: Vec<String>, components: Vec<Expr>) -> Result<FlowField> {
        if vars.is_empty() || vars.len() != components.len() {
            return Err(Error::invalid(
                "need one component per coordinate, at least one coordinate",
            ));
        }
        for comp in &components {
            for v in comp.variables() {
                if !vars.contains(&v) {
                    return Err(Error::invalid(format!(
                        "component uses unknown coordinate `{v}`"
                    )));
                }
            }
        }
        Ok(FlowField { vars, components })
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    fn env<'a>(&'a self, y: &[f64]) -> Vec<(&'a str, f64)> {
        self.vars
            .iter()
            .map(|v| v.as_str())
            .zip(y.iter().copied())
            .collect()
    }

    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        let env = self.env(y);
        self.components.iter().map(|c| c.eval_env(&env)).collect()
    }

    /// Jacobian `DV(y)` via symbolic differentiation of each component.
    pub fn jacobian(&self, y: &[f64]) -> Vec<Vec<f64>> {
        let env = self.env(y);
        self.components
            .iter()
            .map(|c| {
                self.vars
                    .iter()
                    .map(|v| c.diff(v).eval_env(&env))
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowTrajectory {
    /// `(t, state)` at each accepted step.
    pub path: Vec<(f64, Vec<f64>)>,
    /// Whether the trajectory left the supplied box before `t_end`.
    pub exited_domain: bool,
}

/// Integrate the flow of `field` from `y0` for time `t_end`, stopping at the
/// boundary of `domain` (per-coordinate intervals) when supplied.
pub fn flow_map(
    field: &FlowField,
    y0: &[f64],
    t_end: f64,
    domain: Option<&[(f64, f64)]>,
) -> Result<FlowTrajectory> {
    if y0.len() != field.dim() {
        return Err(Error::invalid("initial point dimension mismatch"));
    }
    if let Some(d) = domain {
        if d.len() != field.dim() {
            return Err(Error::invalid("domain dimension mismatch"));
        }
        if d
            .iter()
            .zip(y0)
            .any(|(&(lo, hi), &x)| !(lo <= x && x <= hi))
        {
            return Err(Error::invalid("initial point outside the domain"));
        }
    }
    let opts = OdeOptions {
        rel_tol: 1e-10,
        abs_tol: 1e-12,
        ..OdeOptions::default()
    };
    let outside = |y: &[f64]| -> bool {
        domain
            .map(|d| d.iter().zip(y).any(|(&(lo, hi), &x)| x < lo || x > hi))
            .unwrap_or(false)
    };
    let traj = ode::integrate(
        |_, y| field.eval(y),
        0.0,
        y0,
        t_end,
        &opts,
        |_, y| outside(y),
    )?;
    Ok(FlowTrajectory {
        path: traj.samples.iter().map(|s| (s.t, s.y.clone())).collect(),
        exited_domain: traj.stopped_early,
    })
}

fn inf_norm_mat(a: &[Vec<f64>]) -> f64 {
    a.iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
}

fn inf_norm_vec(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0f64, f64::max)
}

fn sub_norm(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(x, y)| (x - y).abs())
                .sum::<f64>()
        })
        .fold(0.0f64, f64::max)
}

/// Linearized solution `u' = DV(Phi_t(x)) u` along the flow through `x`.
fn variational_solution(
    field: &FlowField,
    x: &[f64],
    u0: &[f64],
    t_end: f64,
) -> Result<Vec<Sample>> {
    let dim = field.dim();
    let opts = OdeOptions {
        rel_tol: 1e-10,
        abs_tol: 1e-12,
        ..OdeOptions::default()
    };
    // Joint system (base point, linearization).
    let mut y0 = x.to_vec();
    y0.extend_from_slice(u0);
    let traj = ode::integrate(
        |_, y| {
            let (base, u) = y.split_at(dim);
            let mut dy = field.eval(base);
            let jac = field.jacobian(base);
            for row in &jac {
                dy.push(row.iter().zip(u).map(|(a, b)| a * b).sum());
            }
            dy
        },
        0.0,
        &y0,
        t_end,
        &opts,
        |_, _| false,
    )?;
    Ok(traj.samples)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderCheckReport {
    pub alpha: f64,
    /// Estimated `||A||_{C^{0,alpha}}` (sup plus Hölder seminorm in the
    /// parameter, sampled along the trajectories).
    pub coefficient_norm: f64,
    /// Worst ratio of observed deviation to the Gronwall bound over the
    /// separation schedule (`<= 1` up to sampling means the bound holds).
    pub max_ratio: f64,
    pub bound_satisfied: bool,
    /// Slope of `log sup_t |u(x1,t) - u(x2,t)|` against `log |x1 - x2|`.
    pub empirical_exponent: f64,
    /// `(separation, sup deviation, bound)` per schedule entry.
    pub samples: Vec<(f64, f64, f64)>,
}

/// Check the Hölder-continuity estimate for the linearized flow.
///
/// For each separation `h` in the schedule the linearized solutions along
/// the flows from `x` and `x + h dir` are compared against the Gronwall
/// bound; the empirical Hölder exponent of the solution map is fitted from
/// the same data.
pub fn holder_check(
    field: &FlowField,
    x: &[f64],
    dir: &[f64],
    u0: &[f64],
    separations: &[f64],
    alpha: f64,
    t_end: f64,
) -> Result<HolderCheckReport> {
    let dim = field.dim();
    if x.len() != dim || dir.len() != dim || u0.len() != dim {
        return Err(Error::invalid("dimension mismatch"));
    }
    if !(0.0 < alpha && alpha <= 1.0) {
        return Err(Error::invalid("Hölder exponent must lie in (0, 1]"));
    }
    if separations.len() < 3 || separations.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::invalid("need at least 3 positive separations"));
    }
    let dir_norm = inf_norm_vec(dir);
    if !(dir_norm > 0.0) {
        return Err(Error::invalid("direction must be nonzero"));
    }

    let base = variational_solution(field, x, u0, t_end)?;
    let probe_times: Vec<f64> = (0..=32).map(|i| t_end * i as f64 / 32.0).collect();

    let mut samples = Vec::with_capacity(separations.len());
    let mut max_ratio = 0.0f64;
    let mut worst_norm = 0.0f64;
    for &h in separations {
        let x2: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + h * d).collect();
        let shifted = variational_solution(field, &x2, u0, t_end)?;

        // Coefficient norm estimate: sup |A| plus the sampled Hölder
        // quotient between the two trajectories (two scales: the full
        // separation and the pointwise base-point distance).
        let mut sup_a = 0.0f64;
        let mut seminorm = 0.0f64;
        let mut dev = 0.0f64;
        let mut sup_u = 0.0f64;
        for &tp in &probe_times {
            let b1: Vec<f64> = (0..dim).map(|i| ode::hermite_eval(&base, i, tp)).collect();
            let b2: Vec<f64> = (0..dim)
                .map(|i| ode::hermite_eval(&shifted, i, tp))
                .collect();
            let u1: Vec<f64> = (0..dim)
                .map(|i| ode::hermite_eval(&base, dim + i, tp))
                .collect();
            let u2: Vec<f64> = (0..dim)
                .map(|i| ode::hermite_eval(&shifted, dim + i, tp))
                .collect();
            let a1 = field.jacobian(&b1);
            let a2 = field.jacobian(&b2);
            sup_a = sup_a.max(inf_norm_mat(&a1)).max(inf_norm_mat(&a2));
            let sep = (h * dir_norm).max(f64::MIN_POSITIVE);
            seminorm = seminorm.max(sub_norm(&a1, &a2) / sep.powf(alpha));
            sup_u = sup_u.max(inf_norm_vec(&u1)).max(inf_norm_vec(&u2));
            let d: f64 = u1
                .iter()
                .zip(&u2)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            dev = dev.max(d);
        }
        let norm = sup_a + seminorm;
        worst_norm = worst_norm.max(norm);
        let bound = ((t_end * norm).exp() - 1.0) * sup_u * (h * dir_norm).powf(alpha);
        let ratio = if bound > 0.0 { dev / bound } else { f64::INFINITY };
        max_ratio = max_ratio.max(ratio);
        samples.push((h * dir_norm, dev, bound));
    }

    // Log-log slope of deviation vs separation (least squares).
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, d, _)| *d > 0.0)
        .map(|(h, d, _)| (h.ln(), d.ln()))
        .collect();
    let exponent = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    } else {
        f64::NAN
    };

    Ok(HolderCheckReport {
        alpha,
        coefficient_norm: worst_norm,
        max_ratio,
        bound_satisfied: max_ratio <= 1.0 + 1e-9,
        empirical_exponent: exponent,
        samples,
    })
}
