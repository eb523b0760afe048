//! Indicial roots and the conjugated radial operator.
//!
//! For the operator `Delta + kappa` on an asymptotically hyperbolic
//! (n+1)-manifold, solutions behave like `rho^s` near the boundary where `s`
//! solves `s(n - s) + kappa = 0`, i.e. `s = (n ± sqrt(n^2 + 4 kappa)) / 2`.
//! Conjugating by `rho^s` (substituting `u = rho^s v`) turns the operator
//! into `Delta v + X(v) + h v` with radial drift `X = -2 s (rho'/rho) d/dt`
//! and potential
//!
//! ```text
//! h = kappa + s (n - s) (rho'/rho)^2 + s rho lap_bar(rho)
//! ```
//!
//! where `lap_bar` is the Laplacian of the compactified metric
//! `g_bar = rho^2 g`. A weight `s` is admissible for the conjugation when
//! `|s - n/2|^2 < n^2/4 + kappa`, the open interval between the two roots.

use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::fd;
use crate::geometry::WarpedMetric;
use crate::{Error, Result};

/// Solutions of the indicial equation `s(n - s) + kappa = 0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IndicialRoots {
    pub n: usize,
    pub kappa: f64,
    /// `n^2 + 4 kappa`; negative means the roots form a complex pair.
    pub discriminant: f64,
    pub complex_pair: bool,
    /// Real parts of the two roots (both `n/2` in the complex case).
    pub s_minus: f64,
    pub s_plus: f64,
    /// Imaginary part magnitude (zero for real roots).
    pub imag: f64,
}

pub fn indicial_roots(n: usize, kappa: f64) -> Result<IndicialRoots> {
    if n < 1 {
        return Err(Error::invalid("boundary dimension must be >= 1"));
    }
    if !kappa.is_finite() {
        return Err(Error::invalid("kappa must be finite"));
    }
    let nf = n as f64;
    let disc = nf * nf + 4.0 * kappa;
    Ok(if disc >= 0.0 {
        let r = disc.sqrt();
        IndicialRoots {
            n,
            kappa,
            discriminant: disc,
            complex_pair: false,
            s_minus: (nf - r) / 2.0,
            s_plus: (nf + r) / 2.0,
            imag: 0.0,
        }
    } else {
        IndicialRoots {
            n,
            kappa,
            discriminant: disc,
            complex_pair: true,
            s_minus: nf / 2.0,
            s_plus: nf / 2.0,
            imag: (-disc).sqrt() / 2.0,
        }
    })
}

/// Whether the real weight `s` lies strictly between the indicial roots:
/// `|s - n/2|^2 < n^2/4 + kappa`.
pub fn admissible(n: usize, kappa: f64, s: f64) -> bool {
    let nf = n as f64;
    let half = nf / 2.0;
    (s - half) * (s - half) < half * half + kappa
}

/// The standard geodesic-gauge defining function for the radial models,
/// `rho = 2 e^{-t}`.
pub fn default_defining_function() -> Expr {
    Expr::parse("2*exp(-t)").expect("fixed expression parses")
}

/// The conjugated operator `rho^{-s} (Delta + kappa) rho^s`, sampled on the
/// metric grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConjugationReport {
    pub s: f64,
    pub kappa: f64,
    pub admissible: bool,
    /// Radial component of the drift vector field, `-2 s rho'/rho`.
    pub drift: Vec<f64>,
    /// Zeroth-order potential `h(t)`.
    pub potential: Vec<f64>,
    /// Grid points the samples live on (copy of the metric grid).
    pub points: Vec<f64>,
}

/// Conjugate `Delta + kappa` by `rho^s` over the given warped metric.
///
/// The defining function is supplied as a closed-form expression in `t`; it
/// must be positive and decreasing on the grid. The compactified Laplacian is
/// evaluated through the density `W = prod (rho f_i)^{m_i}`:
/// `lap_bar(rho) = -(1/(rho W)) d/dt (W rho'/rho)`.
pub fn conjugate(
    metric: &WarpedMetric,
    rho: &Expr,
    s: f64,
    kappa: f64,
) -> Result<ConjugationReport> {
    let vars = rho.variables();
    if vars.iter().any(|v| v != "t") {
        return Err(Error::invalid(
            "defining function may only depend on `t`",
        ));
    }
    let ts = &metric.grid.points;
    let npts = ts.len();
    let drho = rho.diff("t");
    let rho_v: Vec<f64> = ts.iter().map(|&t| rho.eval(t)).collect();
    let drho_v: Vec<f64> = ts.iter().map(|&t| drho.eval(t)).collect();
    for (j, (&r, &dr)) in rho_v.iter().zip(&drho_v).enumerate() {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::invalid(format!(
                "defining function must be positive on the grid (t = {})",
                ts[j]
            )));
        }
        if dr >= 0.0 {
            return Err(Error::invalid(format!(
                "defining function must be strictly decreasing (t = {})",
                ts[j]
            )));
        }
    }

    let nf = metric.n as f64;
    let k = metric.profiles.len();
    let values: Vec<Vec<f64>> = (0..k).map(|i| metric.profile_values(i)).collect();

    // log W = sum m_i log(rho f_i); differentiate once, then assemble
    // d/dt (W rho'/rho) = W * [ (log W)' (rho'/rho) + (rho'/rho)' ].
    let start = if metric.origin_closure { 1 } else { 0 };
    let mut log_ratio = vec![0.0; npts];
    let mut logw = vec![0.0; npts];
    for j in start..npts {
        log_ratio[j] = (-drho_v[j] / rho_v[j]).ln();
        logw[j] = metric
            .profiles
            .iter()
            .enumerate()
            .map(|(i, p)| p.multiplicity as f64 * (rho_v[j] * values[i][j]).ln())
            .sum();
    }
    if start == 1 {
        // The pole value is never used below; pad to keep the stencil happy.
        log_ratio[0] = log_ratio[1];
        logw[0] = logw[1];
    }
    let dlogw = fd::derivative(ts, &logw, 1);
    let dlog_ratio = fd::derivative(ts, &log_ratio, 1);

    let mut drift = vec![0.0; npts];
    let mut potential = vec![0.0; npts];
    for j in 0..npts {
        let ratio = drho_v[j] / rho_v[j];
        drift[j] = -2.0 * s * ratio;
        if j < start {
            potential[j] = f64::INFINITY;
            continue;
        }
        // rho * lap_bar(rho) = -(1/W) d/dt (W rho'/rho)
        //                    = -(rho'/rho) [ (log W)' + (log|rho'/rho|)' ].
        let rho_lap = -ratio * (dlogw[j] + dlog_ratio[j]);
        potential[j] = kappa + s * (nf - s) * ratio * ratio + s * rho_lap;
    }

    Ok(ConjugationReport {
        s,
        kappa,
        admissible: admissible(metric.n, kappa, s),
        drift,
        potential,
        points: ts.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_hyperbolic;
    use crate::grid::RadialGrid;
    use approx::assert_relative_eq;

    #[test]
    fn roots_satisfy_indicial_equation() {
        for &(n, kappa) in &[(3usize, 1.0), (3, -2.0), (5, 0.3), (1, 0.2)] {
            let r = indicial_roots(n, kappa).unwrap();
            assert!(!r.complex_pair);
            for s in [r.s_minus, r.s_plus] {
                assert_relative_eq!(s * (n as f64 - s) + kappa, 0.0, epsilon = 1e-12);
            }
            assert_relative_eq!(r.s_minus + r.s_plus, n as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn complex_pair_below_threshold() {
        // kappa < -n^2/4 puts the roots off the real axis.
        let r = indicial_roots(3, -3.0).unwrap();
        assert!(r.complex_pair);
        assert_relative_eq!(r.s_minus, 1.5);
        assert_relative_eq!(r.imag * r.imag, 3.0 - 2.25, epsilon = 1e-12);
    }

    #[test]
    fn admissibility_is_the_open_root_interval() {
        let r = indicial_roots(3, 1.0).unwrap();
        assert!(admissible(3, 1.0, 1.5));
        assert!(admissible(3, 1.0, r.s_minus + 1e-6));
        assert!(!admissible(3, 1.0, r.s_minus - 1e-6));
        assert!(!admissible(3, 1.0, r.s_plus));
        // Complex case: nothing admissible.
        assert!(!admissible(3, -3.0, 1.5));
    }

    #[test]
    fn hyperbolic_conjugation_matches_closed_form() {
        // On H^4 with rho = 2 e^{-t}:
        //   drift = 2s,  h = kappa + s(3 - s) + 6 s x/(1 - x),  x = e^{-2t}.
        let m = make_hyperbolic(3, RadialGrid::uniform(0.0, 10.0, 2001).unwrap()).unwrap();
        let rho = default_defining_function();
        let (s, kappa) = (1.2, 1.2 * (3.0 - 1.2));
        let rep = conjugate(&m, &rho, s, kappa).unwrap();
        assert!(rep.admissible || kappa == 0.0);
        for (j, &t) in rep.points.iter().enumerate() {
            if t < 0.5 || t > 9.5 {
                continue;
            }
            assert_relative_eq!(rep.drift[j], 2.0 * s, epsilon = 1e-12);
            let x = (-2.0 * t).exp();
            let h_exact = kappa + s * (3.0 - s) + 6.0 * s * x / (1.0 - x);
            assert_relative_eq!(rep.potential[j], h_exact, epsilon = 5e-7);
        }
    }

    #[test]
    fn potential_tends_to_kappa_plus_s_n_minus_s() {
        let m = make_hyperbolic(3, RadialGrid::uniform(0.0, 12.0, 1201).unwrap()).unwrap();
        let rep = conjugate(&m, &default_defining_function(), 2.0, -1.0).unwrap();
        let last = *rep.potential.iter().rev().nth(3).unwrap();
        assert_relative_eq!(last, -1.0 + 2.0 * (3.0 - 2.0), epsilon = 1e-6);
    }

    #[test]
    fn increasing_defining_function_rejected() {
        let m = make_hyperbolic(3, RadialGrid::uniform(0.0, 10.0, 201).unwrap()).unwrap();
        let rho = Expr::parse("exp(t)").unwrap();
        assert!(conjugate(&m, &rho, 1.0, 0.0).is_err());
    }
}
