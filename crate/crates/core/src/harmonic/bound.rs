//! Both sides of the mass inequality on a solved truncation.

use serde::{Deserialize, Serialize};

use super::field::{AxisymField, NodeSide};
use super::hessian::hessian_at;
use super::solve::{solve_spacetime_harmonic, Direction, HarmonicSettings, HarmonicSolution, ResolvedInner};
use super::HarmonicError;
use crate::corner::GluedDataSet;
use crate::masses::{adm_energy_momentum, AdmResult};
use crate::numgrid::{extrapolate_sequence, ConvergenceReport};

/// Flux spheres for the ADM side.
pub const ADM_RADII: [f64; 3] = [50.0, 100.0, 200.0];

/// Corner jumps below `−CORNER_TOLERANCE` violate the corner hypothesis.
pub const CORNER_TOLERANCE: f64 = 1e-10;

/// Corner integral on one interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerTerm {
    pub r_c: f64,
    pub jump: f64,
    /// `2∮(H₋ − H₊)|∇u|`.
    pub mean_curvature_part: f64,
    /// `−2∮(π₋ − π₊)(∇u, ν)`.
    pub momentum_part: f64,
    pub integral: f64,
}

/// Slack at one regularization level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaLevel {
    pub delta: f64,
    pub bulk: f64,
    pub inner: f64,
    pub slack: f64,
}

/// Terms of `16π(E + ⟨a, P⟩) ≥ bulk + corner` on a truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassBoundReport {
    pub direction: [f64; 3],
    pub energy: f64,
    pub momentum: [f64; 3],
    /// `16π(E + ⟨a, P⟩)`.
    pub lhs: f64,
    /// `∫(|∇̄∇̄u|²/|∇u|_δ + 2(μ|∇u| + ⟨J, ∇u⟩))` away from the corners.
    pub bulk: f64,
    /// Sum of the corner integrals.
    pub corner: f64,
    pub corner_terms: Vec<CornerTerm>,
    /// Boundary term `2∮(∂_ν|∇u|_δ + k(∇u, ν))` on a Dirichlet inner sphere.
    pub inner: f64,
    /// `lhs − (bulk + corner + inner)`.
    pub slack: f64,
    /// `lhs − (bulk + corner)`.
    pub theorem_slack: f64,
    pub corner_hypothesis_violated: bool,
    pub delta: f64,
    pub delta_levels: Vec<DeltaLevel>,
    pub delta_extrapolation: ConvergenceReport,
    /// `max − min` slack over the δ-sequence.
    pub delta_variation: f64,
    /// Smallest bulk integrand density, a DEC and Hessian sanity probe.
    pub min_bulk_density: f64,
    pub finite: bool,
}

impl MassBoundReport {
    pub fn slack_recomputed(&self) -> f64 {
        self.lhs - (self.bulk + self.corner + self.inner)
    }

    pub fn theorem_slack_recomputed(&self) -> f64 {
        self.lhs - (self.bulk + self.corner)
    }
}

struct BulkParts {
    bulk: f64,
    min_density: f64,
}

pub(super) fn bulk_density(field: &AxisymField, i: usize, j: usize, side: NodeSide) -> Option<f64> {
    let s = hessian_at(field, i, j, side)?;
    let geo = field.geometry(i, side)?;
    let d = field.derivatives(i, j, side)?;
    let normal = geo.sqrt_f * d.u_r;
    Some(s.norm_sq / s.grad_norm_delta + 2.0 * (geo.mu * s.grad_norm + geo.j_radial * normal))
}

fn bulk_integral(field: &AxisymField) -> BulkParts {
    let g = field.grid();
    let r = g.radii();
    let w = field.sphere_weights();
    let mut bulk = 0.0;
    let mut min_density = f64::INFINITY;
    let mut node_term = |i: usize, side: NodeSide| -> f64 {
        let Some(geo) = field.geometry(i, side) else { return 0.0 };
        let jac = geo.rho * geo.rho / geo.sqrt_f;
        let mut acc = 0.0;
        for j in 0..g.n_theta() {
            if let Some(v) = bulk_density(field, i, j, side) {
                min_density = min_density.min(v);
                acc += w[j] * v * jac;
            }
        }
        acc
    };
    for k in 0..g.n_r() - 1 {
        let h = r[k + 1] - r[k];
        bulk += 0.5 * h * (node_term(k, NodeSide::Upper) + node_term(k + 1, NodeSide::Lower));
    }
    BulkParts { bulk, min_density }
}

fn corner_terms(data: &GluedDataSet, field: &AxisymField) -> Vec<CornerTerm> {
    let g = field.grid();
    let w = field.sphere_weights();
    field
        .corner_nodes()
        .iter()
        .filter_map(|&i| {
            let lo = field.geometry(i, NodeSide::Lower)?;
            let hi = field.geometry(i, NodeSide::Upper)?;
            let iface = data.interfaces().iter().find(|c| (c.r_c - g.radii()[i]).abs() <= 1e-9 * c.r_c.max(1.0))?;
            let mut hpart = 0.0;
            let mut ppart = 0.0;
            for j in 0..g.n_theta() {
                let gl = field.gradient(i, j, NodeSide::Lower)?;
                let gu = field.gradient(i, j, NodeSide::Upper)?;
                let norm = 0.5 * (gl.norm + gu.norm);
                let nu = 0.5 * (gl.normal + gu.normal);
                let area = w[j] * lo.rho * lo.rho;
                hpart += area * 2.0 * (lo.mean_curvature - hi.mean_curvature) * norm;
                ppart -= area * 2.0 * (lo.pi_nn - hi.pi_nn) * nu;
            }
            Some(CornerTerm { r_c: iface.r_c, jump: iface.jump, mean_curvature_part: hpart, momentum_part: ppart, integral: hpart + ppart })
        })
        .collect()
}

fn inner_term(field: &AxisymField, inner: ResolvedInner) -> f64 {
    if inner == ResolvedInner::Center {
        return 0.0;
    }
    let Some(geo) = field.geometry(0, NodeSide::Upper) else { return 0.0 };
    let w = field.sphere_weights();
    let mut acc = 0.0;
    for j in 0..field.grid().n_theta() {
        let Some(d) = field.derivatives(0, j, NodeSide::Upper) else { continue };
        let gn = field.gradient_from(&d, geo).norm_delta;
        let rho = geo.rho;
        let dnorm = (geo.f * d.u_r * d.u_rr + 0.5 * geo.df * d.u_r * d.u_r + d.u_t * d.u_rt / (rho * rho)
            - d.u_t * d.u_t * geo.drho / (rho * rho * rho))
            / gn;
        acc += w[j] * rho * rho * 2.0 * geo.sqrt_f * (dnorm + geo.a * d.u_r);
    }
    acc
}

fn level(field: &AxisymField, inner: ResolvedInner, lhs: f64, corner: f64) -> (DeltaLevel, f64) {
    let b = bulk_integral(field);
    let i = inner_term(field, inner);
    (DeltaLevel { delta: field.delta(), bulk: b.bulk, inner: i, slack: lhs - (b.bulk + corner + i) }, b.min_density)
}

fn assemble(
    data: &GluedDataSet,
    field: &AxisymField,
    inner: ResolvedInner,
    adm: &AdmResult,
    direction: Direction,
    levels: Vec<DeltaLevel>,
) -> MassBoundReport {
    let a = direction.vector();
    let lhs = 16.0 * std::f64::consts::PI * (adm.energy + a[2] * adm.momentum[2]);
    let terms = corner_terms(data, field);
    let corner: f64 = terms.iter().map(|t| t.integral).sum();
    let (base, min_bulk_density) = level(field, inner, lhs, corner);
    let mut levels = levels;
    if levels.is_empty() {
        levels = (1..3)
            .map(|k| level(&field.with_delta(field.delta() / f64::from(1 << k)), inner, lhs, corner).0)
            .collect();
        levels.insert(0, base);
    }
    let deltas: Vec<f64> = levels.iter().map(|l| l.delta).collect();
    let slacks: Vec<f64> = levels.iter().map(|l| l.slack).collect();
    let delta_extrapolation = if deltas.iter().all(|d| *d > 0.0) {
        extrapolate_sequence(&deltas, &slacks)
    } else {
        extrapolate_sequence(&[1.0, 0.5], &[base.slack, base.slack])
    };
    let hi = slacks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = slacks.iter().cloned().fold(f64::INFINITY, f64::min);
    let slack = lhs - (base.bulk + corner + base.inner);
    let theorem_slack = lhs - (base.bulk + corner);
    let finite = [lhs, base.bulk, corner, base.inner, slack].iter().all(|v| v.is_finite());
    MassBoundReport {
        direction: a,
        energy: adm.energy,
        momentum: adm.momentum,
        lhs,
        bulk: base.bulk,
        corner,
        corner_hypothesis_violated: terms.iter().any(|t| t.jump < -CORNER_TOLERANCE),
        corner_terms: terms,
        inner: base.inner,
        slack,
        theorem_slack,
        delta: field.delta(),
        delta_levels: levels,
        delta_extrapolation,
        delta_variation: hi - lo,
        min_bulk_density: if min_bulk_density.is_finite() { min_bulk_density } else { 0.0 },
        finite,
    }
}

/// Evaluates both sides on a fixed field. The δ-sequence `{δ, δ/2, δ/4}`
/// re-evaluates the regularized integrands on the same values.
pub fn mass_bound_report(
    data: &GluedDataSet,
    solution: &HarmonicSolution,
    adm: &AdmResult,
) -> Result<MassBoundReport, HarmonicError> {
    let report = assemble(data, &solution.field, solution.inner, adm, solution.settings.direction, Vec::new());
    if !report.finite {
        return Err(HarmonicError::Grid("mass bound integrals are not finite".into()));
    }
    Ok(report)
}

/// Solves and evaluates both sides. For nonlinear equations every δ of the
/// sequence gets its own solve.
pub fn solve_and_bound(
    data: &GluedDataSet,
    settings: &HarmonicSettings,
) -> Result<(HarmonicSolution, MassBoundReport), HarmonicError> {
    let adm = adm_energy_momentum(data, &ADM_RADII)?;
    let solution = solve_spacetime_harmonic(data, settings)?;
    if solution.picard.linear {
        let report = mass_bound_report(data, &solution, &adm)?;
        return Ok((solution, report));
    }
    let a = settings.direction.vector();
    let lhs = 16.0 * std::f64::consts::PI * (adm.energy + a[2] * adm.momentum[2]);
    let corner: f64 = corner_terms(data, &solution.field).iter().map(|t| t.integral).sum();
    let mut levels = vec![level(&solution.field, solution.inner, lhs, corner).0];
    for k in 1..3 {
        let s = settings.with_delta(settings.delta / f64::from(1 << k));
        let sol = solve_spacetime_harmonic(data, &s)?;
        let c: f64 = corner_terms(data, &sol.field).iter().map(|t| t.integral).sum();
        levels.push(level(&sol.field, sol.inner, lhs, c).0);
    }
    let report = assemble(data, &solution.field, solution.inner, &adm, settings.direction, levels);
    if !report.finite {
        return Err(HarmonicError::Grid("mass bound integrals are not finite".into()));
    }
    Ok((solution, report))
}

/// Relative floating-point floor on `ε_grid`.
pub const ROUNDOFF_FLOOR: f64 = 1e3 * f64::EPSILON;

/// Slack under grid refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridStudy {
    pub resolutions: Vec<usize>,
    pub slacks: Vec<f64>,
    pub theorem_slacks: Vec<f64>,
    /// `|s_k − s_{k−1}|` for consecutive resolutions.
    pub differences: Vec<f64>,
    /// `log₂` of the ratio of the last two differences.
    pub observed_order: Option<f64>,
    /// Error estimate of the finest slack: the last difference, floored at
    /// [`ROUNDOFF_FLOOR`] times the largest finest-level term (at least one).
    pub epsilon_grid: f64,
    pub convergence: ConvergenceReport,
    /// Finest slack `≥ −ε_grid`.
    pub holds: bool,
    pub reports: Vec<MassBoundReport>,
}

impl GridStudy {
    /// Study from per-resolution reports, finest last.
    pub fn from_reports(resolutions: &[usize], reports: Vec<MassBoundReport>) -> Result<Self, HarmonicError> {
        if resolutions.len() != reports.len() || resolutions.len() < 2 || resolutions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HarmonicError::Grid("grid study needs at least two increasing resolutions, one report each".into()));
        }
        let slacks: Vec<f64> = reports.iter().map(|r| r.slack).collect();
        let theorem_slacks: Vec<f64> = reports.iter().map(|r| r.theorem_slack).collect();
        let differences: Vec<f64> = slacks.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let observed_order = if differences.len() >= 2 {
            let (d0, d1) = (differences[differences.len() - 2], differences[differences.len() - 1]);
            let ratio = resolutions[resolutions.len() - 1] as f64 / resolutions[resolutions.len() - 2] as f64;
            (d0 > 0.0 && d1 > 0.0).then(|| (d0 / d1).ln() / ratio.ln())
        } else {
            None
        };
        let finest = &reports[reports.len() - 1];
        let scale = [finest.lhs, finest.bulk, finest.corner, finest.inner].iter().fold(1.0_f64, |m, t| m.max(t.abs()));
        let epsilon_grid = differences.last().unwrap_or(&0.0).max(ROUNDOFF_FLOOR * scale);
        let h: Vec<f64> = resolutions.iter().map(|&n| 1.0 / n as f64).collect();
        let convergence = extrapolate_sequence(&h, &slacks);
        let holds = slacks.last().is_some_and(|s| *s >= -epsilon_grid);
        Ok(GridStudy {
            resolutions: resolutions.to_vec(),
            slacks,
            theorem_slacks,
            differences,
            observed_order,
            epsilon_grid,
            convergence,
            holds,
            reports,
        })
    }
}

/// Runs [`solve_and_bound`] at each resolution (`N` radial intervals and
/// `N` polar cells), finest last. Resolutions run concurrently.
pub fn grid_study(data: &GluedDataSet, settings: &HarmonicSettings, resolutions: &[usize]) -> Result<GridStudy, HarmonicError> {
    if resolutions.len() < 2 || resolutions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HarmonicError::Grid("grid study needs at least two increasing resolutions".into()));
    }
    let reports: Vec<MassBoundReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = resolutions
            .iter()
            .map(|&n| {
                let s = settings.with_resolution(n);
                scope.spawn(move || solve_and_bound(data, &s).map(|(_, r)| r))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("grid study worker panicked")).collect::<Result<Vec<_>, _>>()
    })?;
    GridStudy::from_reports(resolutions, reports)
}
