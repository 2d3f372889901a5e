//! Deterministic numerical kernel.
//!
//! | Piece | Purpose |
//! |-------|---------|
//! | [`ScalarProfile`] | radial functions with two derivatives (analytic, spline, Hermite) |
//! | [`integrate_ode`] | fixed-step RK4 with dense Hermite output |
//! | [`AxisymGrid`], [`AxisymOperator`], [`solve_linear_elliptic`] | finite-volume Laplacian on `(r, θ)` grids and SOR |
//! | [`richardson`], [`extrapolate_sequence`] | extrapolation and observed orders |
//! | [`find_root`] | bracketed secant/bisection |
//! | [`gauss_legendre`], [`sphere_rule`] | quadrature |
//!
//! Every routine is a pure function of its inputs.

mod elliptic;
mod extrapolate;
mod grid;
mod ode;
mod profile;
mod quadrature;
mod roots;

use thiserror::Error;

pub use elliptic::{
    solve_linear_elliptic, AxisymOperator, BoundaryValues, FlatMetric, InnerCondition, MetricDensities, RadialMetric,
    SorOutcome, SorSettings,
};
pub use extrapolate::{
    extrapolate_sequence, extrapolate_to_zero, observed_order, richardson, richardson3, ConvergenceReport,
};
pub use grid::{fd_weights, lagrange3, theta_derivatives, AxisymGrid};
pub use ode::{integrate_ode, OdeSolution, StepControl};
pub use profile::{hermite_jet, solve_tridiagonal, Interval, Jet, ScalarProfile};
pub use quadrature::{gauss_legendre, integrate, sphere_rule, SpherePoint};
pub use roots::{find_root, ROOT_TOLERANCE};

/// Failures of the numerical kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("radius {r} outside profile domain [{lo}, {hi}]")]
    OutOfDomain { r: f64, lo: f64, hi: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("invalid samples: {0}")]
    BadSamples(&'static str),
    #[error("step bound must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("integration diverged after last good abscissa {at}")]
    Diverged { at: f64 },
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("grid: {0}")]
    Grid(String),
    #[error("operator not elliptic at node ({i}, {j})")]
    NotElliptic { i: usize, j: usize },
    #[error("relaxation unconverged after {sweeps} sweeps, residual {residual:e}")]
    Unconverged { sweeps: usize, residual: f64 },
}
