//! Adaptive explicit integration (Dormand–Prince 5(4)).
//!
//! Used by the Einstein shooting, the spectral shooting, and the flow-map
//! operation. Step size is controlled by the embedded 4th-order error
//! estimate against mixed absolute/relative tolerances.

use crate::{Error, Result};

/// Integration settings.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            h_init: 1e-3,
            h_min: 1e-12,
            h_max: 0.25,
            max_steps: 2_000_000,
        }
    }
}

/// One accepted step of dense output: state at the step endpoint.
#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
}

/// Outcome of [`integrate`]: either the full span was covered or the
/// user-supplied stop predicate fired at `t_end`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub stopped_early: bool,
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `(t0, y0)` to `t_end` (forward or backward).
///
/// `stop` is checked after every accepted step; returning `true` ends the
/// integration early (the last accepted sample is retained).
pub fn integrate<F, S>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &OdeOptions,
    mut stop: S,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64]) -> Vec<f64>,
    S: FnMut(f64, &[f64]) -> bool,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let dim = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut dy = f(t, &y);
    let mut h = opts.h_init.min(opts.h_max).max(opts.h_min) * dir;
    let mut samples = vec![Sample {
        t,
        y: y.clone(),
        dy: dy.clone(),
    }];
    let mut stopped_early = false;

    for _ in 0..opts.max_steps {
        if (t - t_end) * dir >= 0.0 {
            return Ok(Trajectory {
                samples,
                stopped_early,
            });
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        let mut k = vec![dy.clone()];
        for s in 0..6 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..dim {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k.push(f(t + C[s] * h, &ys));
        }
        let mut y5 = y.clone();
        let mut err = 0.0f64;
        for i in 0..dim {
            let mut dy5 = 0.0;
            let mut dy4 = 0.0;
            for (j, kj) in k.iter().enumerate() {
                dy5 += B5[j] * kj[i];
                dy4 += B4[j] * kj[i];
            }
            y5[i] += h * dy5;
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
            err = err.max((h * (dy5 - dy4)).abs() / sc);
        }
        if !err.is_finite() {
            return Err(Error::diagnostic(format!(
                "ODE right-hand side became non-finite at t = {t:.6}"
            )));
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            dy = k[6].clone(); // FSAL
            samples.push(Sample {
                t,
                y: y.clone(),
                dy: dy.clone(),
            });
            if stop(t, &y) {
                stopped_early = true;
                return Ok(Trajectory {
                    samples,
                    stopped_early,
                });
            }
        }
        let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h *= fac;
        if h.abs() > opts.h_max {
            h = opts.h_max * dir;
        }
        if h.abs() < opts.h_min {
            return Err(Error::diagnostic(format!(
                "step size underflow at t = {t:.6}"
            )));
        }
    }
    Err(Error::diagnostic("ODE step budget exhausted"))
}

/// Cubic Hermite interpolation of a trajectory component at `t`.
pub fn hermite_eval(samples: &[Sample], comp: usize, t: f64) -> f64 {
    hermite_eval_deriv(samples, comp, t).0
}

/// Value and first derivative of a trajectory component at `t`.
pub fn hermite_eval_deriv(samples: &[Sample], comp: usize, t: f64) -> (f64, f64) {
    let n = samples.len();
    assert!(n >= 2);
    let ascending = samples[n - 1].t >= samples[0].t;
    let mut lo = 0;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let before = if ascending {
            samples[mid].t <= t
        } else {
            samples[mid].t >= t
        };
        if before {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (s0, s1) = (&samples[lo], &samples[hi]);
    let h = s1.t - s0.t;
    let u = (t - s0.t) / h;
    let (y0, y1) = (s0.y[comp], s1.y[comp]);
    let (d0, d1) = (s0.dy[comp] * h, s1.dy[comp] * h);
    let h00 = 2.0 * u.powi(3) - 3.0 * u.powi(2) + 1.0;
    let h10 = u.powi(3) - 2.0 * u.powi(2) + u;
    let h01 = -2.0 * u.powi(3) + 3.0 * u.powi(2);
    let h11 = u.powi(3) - u.powi(2);
    let val = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1;
    let dh00 = 6.0 * u.powi(2) - 6.0 * u;
    let dh10 = 3.0 * u.powi(2) - 4.0 * u + 1.0;
    let dh01 = -dh00;
    let dh11 = 3.0 * u.powi(2) - 2.0 * u;
    let der = (dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1) / h;
    (val, der)
}
