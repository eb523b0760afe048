//! Numerical laboratory for the spectral geometry of asymptotically
//! hyperbolic (Einstein) metrics of cohomogeneity one.
//!
//! The crate is organized around a radial reduction: a metric
//! `g = dt^2 + sum_i f_i(t)^2 sigma_i^2` on an (n+1)-manifold is represented by
//! its warping profiles on a grid, and every operator of interest (curvature,
//! the Laplacian, the growth eigenvalue problem, spectral certificates) reduces
//! to one-dimensional calculus in `t`.
//!
//! Modules:
//! - [`geometry`]: warped metrics, curvature, conformal infinity, boundary
//!   scalar curvature and Yamabe sign of homogeneous boundary metrics.
//! - [`indicial`]: indicial roots and weight admissibility for `Delta + kappa`,
//!   conjugated-operator coefficient diagnostics.
//! - [`spectrum`]: bottom of the L^2 spectrum by domain exhaustion, discrete
//!   eigenvalues below `n^2/4` by shooting, and the `d(n-d)` formula.
//! - [`eigenfunction`]: the growth eigenfunction of `(Delta + n + 1)u = 0`,
//!   its boundary diagnostics, subharmonicity identity, and the test-function
//!   certificate for `lambda_0 >= s(n-s)`.
//! - [`einstein`]: numerical integration of biaxial cohomogeneity-one Einstein
//!   metrics on the 4-ball (Berger-sphere conformal infinities).
//! - [`gauge_flow`]: geodesic defining functions and the Holder/Gronwall
//!   regularity check for ODE flows.

pub mod eigenfunction;
pub mod einstein;
pub mod expr;
pub mod extrapolate;
pub mod fd;
pub mod gauge_flow;
pub mod geometry;
pub mod grid;
pub mod indicial;
pub mod io;
pub mod ode;
pub mod spectrum;

mod tridiag;

pub use grid::{RadialGrid, SpacingPolicy};

/// Crate-wide error type.
///
/// `InvalidInput` is a contract violation by the caller (bad file, bad
/// parameter); `Diagnostic` is a numeric failure the caller may retry with a
/// finer grid or looser tolerance.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numeric diagnostic: {0}")]
    Diagnostic(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
    pub fn diagnostic(msg: impl Into<String>) -> Self {
        Error::Diagnostic(msg.into())
    }
}
