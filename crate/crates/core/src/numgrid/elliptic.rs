//! Finite-volume discretization of `Δ_g` for warped metrics
//! `f⁻¹dr² + ρ(r)²dΩ²` on an [`AxisymGrid`], and its SOR solution.
//!
//! Each node equation reads `Σ_nb a_nb (u_nb − u_P) = s_P` where `s_P` is
//! the integral of `Δu` over the node's control volume (per unit azimuth).

use serde::{Deserialize, Serialize};

use super::quadrature::gauss_legendre;
use super::{AxisymGrid, NumError};

/// Metric densities along the radial direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricDensities {
    /// `√f·ρ²`, the radial flux coefficient.
    pub flux: f64,
    /// `1/√f`, the polar flux coefficient.
    pub angular: f64,
    /// `ρ²/√f`, the volume density.
    pub volume: f64,
}

impl MetricDensities {
    pub fn flat(r: f64) -> Self {
        Self { flux: r * r, angular: 1.0, volume: r * r }
    }
}

/// Source of metric densities; `interval` is the index `k` of
/// `[r_k, r_{k+1}]` the radius belongs to, so one-sided data at corner
/// nodes is always well defined.
pub trait RadialMetric {
    fn densities(&self, interval: usize, r: f64) -> MetricDensities;
}

impl<F: Fn(usize, f64) -> MetricDensities> RadialMetric for F {
    fn densities(&self, interval: usize, r: f64) -> MetricDensities {
        self(interval, r)
    }
}

/// Flat Euclidean metric in spherical coordinates.
pub struct FlatMetric;

impl RadialMetric for FlatMetric {
    fn densities(&self, _: usize, r: f64) -> MetricDensities {
        MetricDensities::flat(r)
    }
}

/// Assembled five-point operator.
#[derive(Debug, Clone)]
pub struct AxisymOperator {
    pub grid: AxisymGrid,
    pub east: Vec<f64>,
    pub west: Vec<f64>,
    pub north: Vec<f64>,
    pub south: Vec<f64>,
    /// Coupling of the center node to row `i = 1` (empty without a center).
    pub center: Vec<f64>,
    /// `∫ρ²/√f dr` over the inner and outer half cell of each radial node.
    pub half_volumes: Vec<[f64; 2]>,
    /// Solid-angle weights used by the flux balance.
    pub solid_angles: Vec<f64>,
}

const HALF_CELL_POINTS: usize = 3;

impl AxisymOperator {
    pub fn assemble<M: RadialMetric>(grid: &AxisymGrid, metric: &M) -> Self {
        let r = grid.radii();
        let n = grid.n_r();
        let m = grid.theta_cells();
        let nt = grid.n_theta();
        let h = 0.5 * grid.dtheta();
        let solid = grid.operator_solid_angles();
        let polar_flux: Vec<f64> = (0..m).map(|j| ((j as f64 + 0.5) * grid.dtheta()).sin() / (2.0 * h.sin())).collect();

        let radial_flux: Vec<f64> = (0..n - 1)
            .map(|k| {
                let mid = 0.5 * (r[k] + r[k + 1]);
                metric.densities(k, mid).flux / (r[k + 1] - r[k])
            })
            .collect();

        let (gx, gw) = gauss_legendre(HALF_CELL_POINTS);
        let half_integrals = |k: usize, a: f64, b: f64| -> (f64, f64) {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let mut ang = 0.0;
            let mut vol = 0.0;
            for (x, w) in gx.iter().zip(&gw) {
                let d = metric.densities(k, mid + half * x);
                ang += w * d.angular;
                vol += w * d.volume;
            }
            (ang * half, vol * half)
        };

        let mut half_volumes = vec![[0.0; 2]; n];
        let mut polar_weight = vec![0.0; n];
        for i in 0..n {
            let (mut ang, mut vol) = ([0.0; 2], [0.0; 2]);
            if i > 0 {
                let (a, v) = half_integrals(i - 1, 0.5 * (r[i - 1] + r[i]), r[i]);
                ang[0] = a;
                vol[0] = v;
            }
            if i + 1 < n {
                let (a, v) = half_integrals(i, r[i], 0.5 * (r[i] + r[i + 1]));
                ang[1] = a;
                vol[1] = v;
            }
            half_volumes[i] = vol;
            if r[i] > 0.0 && i > 0 && i + 1 < n {
                let lo = 0.5 * (r[i - 1] + r[i]);
                let hi = 0.5 * (r[i] + r[i + 1]);
                let flat_exactness = (hi * hi - lo * lo) / (2.0 * r[i] * (hi - lo) * h.cos());
                polar_weight[i] = (ang[0] + ang[1]) * flat_exactness;
            }
        }

        let mut east = vec![0.0; n * nt];
        let mut west = vec![0.0; n * nt];
        let mut north = vec![0.0; n * nt];
        let mut south = vec![0.0; n * nt];
        for i in 1..n.saturating_sub(1) {
            for j in 0..nt {
                let p = grid.index(i, j);
                east[p] = radial_flux[i] * solid[j];
                west[p] = radial_flux[i - 1] * solid[j];
                if j < m {
                    north[p] = polar_weight[i] * polar_flux[j];
                }
                if j > 0 {
                    south[p] = polar_weight[i] * polar_flux[j - 1];
                }
            }
        }
        let center = if grid.has_center() { solid.iter().map(|s| radial_flux[0] * s).collect() } else { Vec::new() };
        Self { grid: grid.clone(), east, west, north, south, center, half_volumes, solid_angles: solid }
    }

    /// Control volume of node `(i, j)` per unit azimuth.
    pub fn cell_volume(&self, i: usize, j: usize) -> f64 {
        let v = self.half_volumes[i];
        (v[0] + v[1]) * self.solid_angles[j]
    }

    /// Control volume of the center node per unit azimuth.
    pub fn center_volume(&self) -> f64 {
        self.half_volumes[0][1] * self.solid_angles.iter().sum::<f64>()
    }

    fn diagonal(&self, p: usize) -> f64 {
        self.east[p] + self.west[p] + self.north[p] + self.south[p]
    }

    /// Scaled residual `|Σ a_nb(u_nb − u_P) − s_P| / a_P` maximized over unknowns.
    pub fn residual(&self, u: &[f64], source: &[f64], boundary: &BoundaryValues) -> f64 {
        let g = &self.grid;
        let n = g.n_r();
        let nt = g.n_theta();
        let mut worst: f64 = 0.0;
        if matches!(boundary.inner, InnerCondition::Center) {
            let u0 = u[g.index(0, 0)];
            let (num, den) = self.center_balance(u);
            worst = worst.max(((num - den * u0) - source[g.index(0, 0)]).abs() / den);
        }
        for i in 1..n - 1 {
            for j in 0..nt {
                let p = g.index(i, j);
                let up = u[p];
                let mut acc = self.east[p] * (u[p + nt] - up) + self.west[p] * (u[p - nt] - up);
                if j + 1 < nt {
                    acc += self.north[p] * (u[p + 1] - up);
                }
                if j > 0 {
                    acc += self.south[p] * (u[p - 1] - up);
                }
                worst = worst.max((acc - source[p]).abs() / self.diagonal(p));
            }
        }
        worst
    }

    fn center_balance(&self, u: &[f64]) -> (f64, f64) {
        let g = &self.grid;
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, w) in self.center.iter().enumerate() {
            num += w * u[g.index(1, j)];
            den += w;
        }
        (num, den)
    }

    pub fn check_elliptic(&self) -> Result<(), NumError> {
        let g = &self.grid;
        for i in 1..g.n_r() - 1 {
            for j in 0..g.n_theta() {
                let p = g.index(i, j);
                let coeffs = [self.east[p], self.west[p], self.north[p], self.south[p]];
                if coeffs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) || !(self.diagonal(p) > 0.0) {
                    return Err(NumError::NotElliptic { i, j });
                }
            }
        }
        Ok(())
    }
}

/// Condition at the innermost radial node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InnerCondition {
    /// Regular center at `r = 0`; the whole row is one unknown.
    Center,
    /// Prescribed values on the inner sphere, one per polar row.
    Dirichlet(Vec<f64>),
}

/// Boundary data for [`solve_linear_elliptic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryValues {
    pub inner: InnerCondition,
    /// Dirichlet values on the outer sphere, one per polar row.
    pub outer: Vec<f64>,
}

/// Relaxation controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SorSettings {
    /// Over-relaxation factor; `None` picks `2/(1 + sin(π/max(N, M)))`.
    pub omega: Option<f64>,
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub check_interval: usize,
}

impl Default for SorSettings {
    fn default() -> Self {
        Self { omega: None, tolerance: 1e-12, max_sweeps: 200_000, check_interval: 10 }
    }
}

/// Converged relaxation result.
#[derive(Debug, Clone)]
pub struct SorOutcome {
    pub values: Vec<f64>,
    pub sweeps: usize,
    pub residual: f64,
    /// Scaled residual after every check interval.
    pub history: Vec<f64>,
}

/// Solves the assembled system by successive over-relaxation, sweeping
/// rows in increasing radius and, within a row, increasing polar angle.
pub fn solve_linear_elliptic(
    op: &AxisymOperator,
    source: &[f64],
    boundary: &BoundaryValues,
    initial: Option<&[f64]>,
    settings: &SorSettings,
) -> Result<SorOutcome, NumError> {
    let g = &op.grid;
    let n = g.n_r();
    let nt = g.n_theta();
    if source.len() != g.len() || boundary.outer.len() != nt {
        return Err(NumError::Grid("source or boundary data do not match the grid".into()));
    }
    match &boundary.inner {
        InnerCondition::Center if !g.has_center() => {
            return Err(NumError::Grid("center condition needs a grid starting at r = 0".into()))
        }
        InnerCondition::Dirichlet(_) if g.has_center() => {
            return Err(NumError::Grid("grid starting at r = 0 needs the center condition".into()))
        }
        InnerCondition::Dirichlet(v) if v.len() != nt => {
            return Err(NumError::Grid("inner boundary data do not match the grid".into()))
        }
        _ => {}
    }
    op.check_elliptic()?;

    let mut u = match initial {
        Some(v) if v.len() == g.len() => v.to_vec(),
        Some(_) => return Err(NumError::Grid("initial guess does not match the grid".into())),
        None => vec![0.0; g.len()],
    };
    for j in 0..nt {
        u[g.index(n - 1, j)] = boundary.outer[j];
    }
    let center = matches!(boundary.inner, InnerCondition::Center);
    match &boundary.inner {
        InnerCondition::Dirichlet(v) => {
            for j in 0..nt {
                u[g.index(0, j)] = v[j];
            }
        }
        InnerCondition::Center => {
            let u0 = u[g.index(0, 0)];
            for j in 0..nt {
                u[g.index(0, j)] = u0;
            }
        }
    }

    let omega = settings.omega.unwrap_or_else(|| {
        let k = n.max(nt) as f64;
        2.0 / (1.0 + (std::f64::consts::PI / k).sin())
    });
    let diag: Vec<f64> = (0..g.len()).map(|p| op.diagonal(p)).collect();
    let mut history = Vec::new();
    let check = settings.check_interval.max(1);
    let mut sweeps = 0;
    loop {
        if center {
            let (num, den) = op.center_balance(&u);
            let s0 = source[g.index(0, 0)];
            let old = u[0];
            let new = old + omega * ((num - s0) / den - old);
            for j in 0..nt {
                u[g.index(0, j)] = new;
            }
        }
        for i in 1..n - 1 {
            for j in 0..nt {
                let p = g.index(i, j);
                let mut acc = op.east[p] * u[p + nt] + op.west[p] * u[p - nt];
                if j + 1 < nt {
                    acc += op.north[p] * u[p + 1];
                }
                if j > 0 {
                    acc += op.south[p] * u[p - 1];
                }
                let target = (acc - source[p]) / diag[p];
                u[p] += omega * (target - u[p]);
            }
        }
        sweeps += 1;
        if sweeps % check == 0 || sweeps >= settings.max_sweeps {
            let res = op.residual(&u, source, boundary);
            history.push(res);
            if !res.is_finite() {
                return Err(NumError::Unconverged { sweeps, residual: res });
            }
            if res <= settings.tolerance {
                return Ok(SorOutcome { values: u, sweeps, residual: res, history });
            }
            if sweeps >= settings.max_sweeps {
                return Err(NumError::Unconverged { sweeps, residual: res });
            }
        }
    }
}
