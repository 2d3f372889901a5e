//! Picard iteration for `Δu + (tr k)|∇u|_δ = 0` on spherical truncations.

use serde::{Deserialize, Serialize};

use super::field::{AxisymField, NodeSide};
use super::HarmonicError;
use crate::corner::GluedDataSet;
use crate::numgrid::{
    solve_linear_elliptic, AxisymGrid, AxisymOperator, BoundaryValues, InnerCondition, MetricDensities, SorSettings,
};

/// Asymptotic direction of `u ~ ⟨a, x⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    PlusZ,
    MinusZ,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::PlusZ => 1.0,
            Direction::MinusZ => -1.0,
        }
    }

    pub fn vector(self) -> [f64; 3] {
        [0.0, 0.0, self.sign()]
    }
}

/// Condition on the innermost sphere of the truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum InnerBoundary {
    /// Center if the data have one, a constant on weakly outer trapped
    /// spheres, the asymptote otherwise.
    Auto,
    Center,
    /// Constant Dirichlet value; `None` takes the mean of the asymptote over
    /// the sphere.
    Constant(Option<f64>),
    /// Dirichlet data equal to the asymptote `±r cos θ`.
    Asymptote,
}

/// Resolved inner condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum ResolvedInner {
    Center,
    Constant(f64),
    Asymptote,
}

/// Solver controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSettings {
    /// Truncation radius `L`.
    pub outer_radius: f64,
    pub radial_intervals: usize,
    pub theta_cells: usize,
    /// Scale below which radial spacing is nearly uniform.
    pub stretch_scale: f64,
    pub delta: f64,
    pub direction: Direction,
    pub inner: InnerBoundary,
    /// Stop when the max-norm change of successive iterates is below this.
    pub picard_tolerance: f64,
    pub max_picard: usize,
    /// Under-relaxation of the Picard update; linear problems take the full step.
    pub damping: f64,
    pub sor_tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for HarmonicSettings {
    fn default() -> Self {
        Self {
            outer_radius: 40.0,
            radial_intervals: 64,
            theta_cells: 64,
            stretch_scale: 1.0,
            delta: 1e-2,
            direction: Direction::PlusZ,
            inner: InnerBoundary::Auto,
            picard_tolerance: 1e-9,
            max_picard: 200,
            damping: 0.7,
            sor_tolerance: 1e-11,
            max_sweeps: 400_000,
        }
    }
}

impl HarmonicSettings {
    /// `N` radial intervals and `N` polar cells.
    pub fn with_resolution(self, n: usize) -> Self {
        Self { radial_intervals: n, theta_cells: n, ..self }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    /// Stretched grid from the inner end of the data to `L` with a node on
    /// every corner.
    pub fn grid(&self, data: &GluedDataSet) -> Result<AxisymGrid, HarmonicError> {
        let l = self.outer_radius;
        if !(l > data.r_min()) || l > data.r_max() {
            return Err(HarmonicError::Truncation { l, r_min: data.r_min(), r_max: data.r_max() });
        }
        let corners: Vec<f64> = data.corner_radii().into_iter().filter(|&r| r > data.r_min() && r < l).collect();
        let scale = self.stretch_scale.max(1e-3);
        Ok(AxisymGrid::stretched(data.r_min(), l, &corners, self.radial_intervals, self.theta_cells, scale)?)
    }
}

/// Sign of `∂_ν u` on a constant-value inner sphere, `ν` pointing out of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerSignReport {
    pub value: f64,
    pub min_normal_derivative: f64,
    pub max_normal_derivative: f64,
    pub single_signed: bool,
}

/// Convergence record of the Picard iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    pub iterations: usize,
    /// Max-norm change of each update.
    pub changes: Vec<f64>,
    pub sor_sweeps: usize,
    /// Scaled residual of `Δu + K|∇u|_δ` at the final iterate.
    pub equation_residual: f64,
    pub linear: bool,
}

impl PicardReport {
    /// Changes decrease monotonically after the first three iterations.
    pub fn contraction_monotone(&self) -> bool {
        self.changes.iter().skip(3).collect::<Vec<_>>().windows(2).all(|w| w[1] <= w[0])
    }
}

/// Converged spacetime harmonic function on a truncation.
#[derive(Debug, Clone)]
pub struct HarmonicSolution {
    pub field: AxisymField,
    pub settings: HarmonicSettings,
    pub inner: ResolvedInner,
    pub picard: PicardReport,
    pub inner_sign: Option<InnerSignReport>,
    pub max_principle_violation: f64,
}

fn metric_densities(data: &GluedDataSet, grid: &AxisymGrid) -> Result<Vec<usize>, HarmonicError> {
    let r = grid.radii();
    (0..grid.n_r() - 1).map(|k| Ok(data.patch_index(0.5 * (r[k] + r[k + 1]), None)?)).collect()
}

fn resolve_inner(data: &GluedDataSet, grid: &AxisymGrid, spec: InnerBoundary) -> Result<ResolvedInner, HarmonicError> {
    let center = grid.has_center();
    let resolved = match spec {
        InnerBoundary::Auto if center => ResolvedInner::Center,
        InnerBoundary::Auto => {
            let r0 = grid.radii()[0];
            let trapped = data.innermost().null_expansions(r0)?.weakly_outer_trapped;
            if trapped {
                ResolvedInner::Constant(0.0)
            } else {
                ResolvedInner::Asymptote
            }
        }
        InnerBoundary::Center => ResolvedInner::Center,
        InnerBoundary::Constant(v) => ResolvedInner::Constant(v.unwrap_or(0.0)),
        InnerBoundary::Asymptote => ResolvedInner::Asymptote,
    };
    match (center, resolved) {
        (true, ResolvedInner::Center) | (false, ResolvedInner::Constant(_)) | (false, ResolvedInner::Asymptote) => {
            Ok(resolved)
        }
        (true, _) => Err(HarmonicError::IncompatibleInner("a grid starting at r = 0 needs the center condition".into())),
        (false, ResolvedInner::Center) => {
            Err(HarmonicError::IncompatibleInner(format!("no center: the grid starts at r = {}", grid.radii()[0])))
        }
    }
}

/// FV source `∫(−K|∇u|_δ)` over each control volume, per unit azimuth.
fn picard_source(field: &AxisymField, op: &AxisymOperator) -> Vec<f64> {
    let g = field.grid();
    let mut src = vec![0.0; g.len()];
    let n = g.n_r();
    for i in 0..n - 1 {
        if g.radii()[i] == 0.0 {
            let k = field.geometry(1, NodeSide::Lower).map(|geo| geo.tr_k).unwrap_or(0.0);
            if k != 0.0 {
                let gn = field.grad_norm_delta(0, 0, NodeSide::Upper).unwrap_or(field.delta());
                src[g.index(0, 0)] = -k * gn * op.center_volume();
            }
            continue;
        }
        for side in field.sides(i) {
            let Some(geo) = field.geometry(i, side) else { continue };
            if geo.tr_k == 0.0 {
                continue;
            }
            let hv = op.half_volumes[i][side.index()];
            for j in 0..g.n_theta() {
                let gn = field.grad_norm_delta(i, j, side).unwrap_or(field.delta());
                src[g.index(i, j)] -= geo.tr_k * gn * hv * op.solid_angles[j];
            }
        }
    }
    src
}

fn is_linear(field: &AxisymField) -> bool {
    (0..field.grid().n_r()).all(|i| {
        field.sides(i).iter().all(|&s| field.geometry(i, s).is_none_or(|geo| geo.tr_k == 0.0))
    })
}

/// Solves on the grid given by `settings`.
pub fn solve_spacetime_harmonic(data: &GluedDataSet, settings: &HarmonicSettings) -> Result<HarmonicSolution, HarmonicError> {
    let grid = settings.grid(data)?;
    solve_on_grid(data, grid, settings)
}

/// Picard iteration: solve `Δu = −K|∇uₙ|_δ` with the asymptote on the
/// outer sphere until successive iterates agree.
pub fn solve_on_grid(data: &GluedDataSet, grid: AxisymGrid, settings: &HarmonicSettings) -> Result<HarmonicSolution, HarmonicError> {
    let inner = resolve_inner(data, &grid, settings.inner)?;
    let patches = metric_densities(data, &grid)?;
    let metric = |k: usize, r: f64| {
        let p = data.patches()[patches[k]].raw_extended(r);
        let sf = p.sqrt_f();
        let rho2 = p.rho.value * p.rho.value;
        MetricDensities { flux: sf * rho2, angular: 1.0 / sf, volume: rho2 / sf }
    };
    let op = AxisymOperator::assemble(&grid, &metric);
    let s = settings.direction.sign();
    let n = grid.n_r();
    let nt = grid.n_theta();
    let r = grid.radii().to_vec();
    let asymptote = |i: usize, j: usize| s * r[i] * grid.theta(j).cos();
    let outer: Vec<f64> = (0..nt).map(|j| asymptote(n - 1, j)).collect();
    let inner_condition = match inner {
        ResolvedInner::Center => InnerCondition::Center,
        ResolvedInner::Constant(c) => InnerCondition::Dirichlet(vec![c; nt]),
        ResolvedInner::Asymptote => InnerCondition::Dirichlet((0..nt).map(|j| asymptote(0, j)).collect()),
    };
    let bv = BoundaryValues { inner: inner_condition, outer };
    let mut values: Vec<f64> = (0..grid.len()).map(|p| asymptote(p / nt, p % nt)).collect();
    if let ResolvedInner::Constant(c) = inner {
        for j in 0..nt {
            values[grid.index(0, j)] = c;
        }
    }
    if grid.has_center() {
        for j in 0..nt {
            values[grid.index(0, j)] = 0.0;
        }
    }
    let sor = SorSettings { omega: None, tolerance: settings.sor_tolerance, max_sweeps: settings.max_sweeps, check_interval: 10 };
    let mut field = AxisymField::new(data, grid.clone(), values, settings.delta)?;
    let linear = is_linear(&field);
    let mut changes = Vec::new();
    let mut sweeps = 0;
    loop {
        let src = picard_source(&field, &op);
        let out = solve_linear_elliptic(&op, &src, &bv, Some(field.values()), &sor)?;
        sweeps += out.sweeps;
        let w = if linear { 1.0 } else { settings.damping };
        let next: Vec<f64> = field.values().iter().zip(&out.values).map(|(a, b)| (1.0 - w) * a + w * b).collect();
        let change = field.values().iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        changes.push(change);
        field = AxisymField::new(data, grid.clone(), next, settings.delta)?;
        if linear || change <= settings.picard_tolerance {
            break;
        }
        if changes.len() >= settings.max_picard || !change.is_finite() {
            return Err(HarmonicError::PicardStagnation { iterations: changes.len(), history: changes });
        }
    }
    let src = picard_source(&field, &op);
    let equation_residual = op.residual(field.values(), &src, &bv);
    let inner_sign = match inner {
        ResolvedInner::Constant(c) => {
            let d: Vec<f64> = (0..nt)
                .filter_map(|j| {
                    let geo = field.geometry(0, NodeSide::Upper)?;
                    Some(-geo.sqrt_f * field.radial_derivative(0, j, NodeSide::Upper)?)
                })
                .collect();
            let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Some(InnerSignReport { value: c, min_normal_derivative: lo, max_normal_derivative: hi, single_signed: lo >= 0.0 || hi <= 0.0 })
        }
        _ => None,
    };
    let max_principle_violation = field.max_principle_violation();
    Ok(HarmonicSolution {
        field,
        settings: *settings,
        inner,
        picard: PicardReport { iterations: changes.len(), changes, sor_sweeps: sweeps, equation_residual, linear },
        inner_sign,
        max_principle_violation,
    })
}
