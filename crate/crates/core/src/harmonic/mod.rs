//! Spacetime harmonic functions `Δu + (tr k)|∇u| = 0` on axisymmetric
//! truncations of glued data sets, and the integral identities they satisfy.
//!
//! | Piece | Purpose |
//! |-------|---------|
//! | [`solve_spacetime_harmonic`] | Picard iteration with frozen `|∇uₙ|_δ` on a spherical truncation |
//! | [`AxisymField`] | node values with side-aware derivatives at corners |
//! | [`spacetime_hessian`] | `∇̄∇̄u = ∇∇u + |∇u|k` in the orthonormal frame |
//! | [`mass_bound_report`] | both sides of the mass inequality, δ-sequence, grid study |
//! | [`integral_formula_check`] | bulk divergence identity on an annulus |
//! | [`boundary_formula_check`] | boundary flux identity on a coordinate sphere |

mod bound;
mod field;
mod hessian;
mod lemmas;
mod solve;

use thiserror::Error;

use crate::corner::CornerError;
use crate::geometry::GeometryError;
use crate::masses::MassError;
use crate::numgrid::NumError;

pub use bound::{
    grid_study, mass_bound_report, solve_and_bound, CornerTerm, DeltaLevel, GridStudy, MassBoundReport, ADM_RADII,
    CORNER_TOLERANCE,
};
pub use field::{AxisymField, Gradient, NodeDerivatives, NodeGeometry, NodeSide};
pub use hessian::{
    covariant_hessian, frame_norm_sq, hessian_at, k_frame, spacetime_hessian, FrameTensor, HessianSample,
    SpacetimeHessianField,
};
pub use lemmas::{boundary_formula_check, integral_formula_check, BoundaryFormulaReport, IntegralFormulaReport};
pub use solve::{
    solve_on_grid, solve_spacetime_harmonic, Direction, HarmonicSettings, HarmonicSolution, InnerBoundary,
    InnerSignReport, PicardReport, ResolvedInner,
};

/// Failures of the harmonic solver and the identity checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarmonicError {
    #[error("Picard iteration stagnated after {iterations} iterations (last change {:e})", history.last().copied().unwrap_or(f64::NAN))]
    PicardStagnation { iterations: usize, history: Vec<f64> },
    #[error("inner boundary incompatible with the grid: {0}")]
    IncompatibleInner(String),
    #[error("grid: {0}")]
    Grid(String),
    #[error("truncation radius {l} outside the data domain ({r_min}, {r_max}]")]
    Truncation { l: f64, r_min: f64, r_max: f64 },
    #[error("region: {0}")]
    Region(String),
    #[error(transparent)]
    Mass(#[from] MassError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Corner(#[from] CornerError),
    #[error(transparent)]
    Numeric(#[from] NumError),
}
