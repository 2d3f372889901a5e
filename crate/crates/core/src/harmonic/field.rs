//! Sampled axisymmetric fields with side-aware derivative stencils.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::HarmonicError;
use crate::corner::GluedDataSet;
use crate::numgrid::{fd_weights, theta_derivatives, AxisymGrid};

/// Which radial interval a node quantity is taken from; the two differ only
/// at corner nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeSide {
    /// Interval `[r_{i-1}, r_i]`.
    Lower,
    /// Interval `[r_i, r_{i+1}]`.
    Upper,
}

impl NodeSide {
    pub fn index(self) -> usize {
        match self {
            NodeSide::Lower => 0,
            NodeSide::Upper => 1,
        }
    }
}

/// Metric and data quantities at a radial node, from one side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeGeometry {
    pub r: f64,
    pub f: f64,
    pub df: f64,
    pub sqrt_f: f64,
    pub rho: f64,
    pub drho: f64,
    pub a: f64,
    pub b: f64,
    pub tr_k: f64,
    pub mu: f64,
    pub j_radial: f64,
    pub mean_curvature: f64,
    pub pi_nn: f64,
}

/// Coordinate derivatives of `u` at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeDerivatives {
    pub u: f64,
    pub u_r: f64,
    pub u_t: f64,
    pub u_rr: f64,
    pub u_rt: f64,
    pub u_tt: f64,
}

/// Gradient of `u` in the frame `(√f ∂_r, ∂_θ/ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gradient {
    pub normal: f64,
    pub tangential: f64,
    pub norm: f64,
    /// `√(|∇u|² + δ²)`.
    pub norm_delta: f64,
}

#[derive(Debug, Clone)]
struct Stencil {
    nodes: Vec<usize>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

/// Values of `u` on an [`AxisymGrid`] together with the data geometry at
/// every node and side.
#[derive(Debug, Clone)]
pub struct AxisymField {
    grid: AxisymGrid,
    values: Vec<f64>,
    delta: f64,
    breaks: Vec<usize>,
    geometry: Vec<[Option<NodeGeometry>; 2]>,
    stencils: Vec<[Option<Stencil>; 2]>,
    u_t: Vec<f64>,
    u_tt: Vec<f64>,
}

impl AxisymField {
    /// Wraps node values; every corner of `data` inside the grid must be a node.
    pub fn new(data: &GluedDataSet, grid: AxisymGrid, values: Vec<f64>, delta: f64) -> Result<Self, HarmonicError> {
        if values.len() != grid.len() {
            return Err(HarmonicError::Grid(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HarmonicError::Grid("field values must be finite".into()));
        }
        if !(delta >= 0.0) {
            return Err(HarmonicError::Grid(format!("regularization δ must be non-negative, got {delta}")));
        }
        let r = grid.radii();
        let n = grid.n_r();
        let tol = 1e-9 * r[n - 1].max(1.0);
        if r[0] < data.r_min() - tol || r[n - 1] > data.r_max() + tol {
            return Err(HarmonicError::Grid(format!(
                "grid [{}, {}] leaves the data domain [{}, {}]",
                r[0],
                r[n - 1],
                data.r_min(),
                data.r_max()
            )));
        }
        let mut breaks = vec![0];
        for rc in data.corner_radii() {
            if rc > r[0] && rc < r[n - 1] {
                let i = grid.node_at(rc).ok_or_else(|| HarmonicError::Grid(format!("corner r = {rc} is not a grid node")))?;
                breaks.push(i);
            }
        }
        breaks.push(n - 1);
        if breaks.windows(2).any(|w| w[1] < w[0] + 2) {
            return Err(HarmonicError::Grid("every smooth segment needs at least two radial intervals".into()));
        }

        let mut geometry = vec![[None, None]; n];
        let mut stencils: Vec<[Option<Stencil>; 2]> = (0..n).map(|_| [None, None]).collect();
        for w in breaks.windows(2) {
            let (s0, s1) = (w[0], w[1]);
            let mid = 0.5 * (r[s0] + r[s0 + 1]);
            let patch = data.patch_for(mid, None)?;
            for i in s0..=s1 {
                let side = if i == s0 { NodeSide::Upper } else if i == s1 { NodeSide::Lower } else { NodeSide::Upper };
                let geo = if r[i] > 0.0 { Some(node_geometry(patch, r[i])?) } else { None };
                let st = radial_stencil(r, i, s0, s1);
                if i > s0 && i < s1 {
                    geometry[i] = [geo, geo];
                    stencils[i] = [Some(st.clone()), Some(st)];
                } else {
                    geometry[i][side.index()] = geo;
                    stencils[i][side.index()] = Some(st);
                }
            }
        }

        let nt = grid.n_theta();
        let mut u_t = vec![0.0; grid.len()];
        let mut u_tt = vec![0.0; grid.len()];
        for i in 0..n {
            let row = &values[grid.index(i, 0)..grid.index(i, 0) + nt];
            let (d1, d2) = theta_derivatives(row, grid.dtheta());
            u_t[grid.index(i, 0)..grid.index(i, 0) + nt].copy_from_slice(&d1);
            u_tt[grid.index(i, 0)..grid.index(i, 0) + nt].copy_from_slice(&d2);
        }
        Ok(Self { grid, values, delta, breaks, geometry, stencils, u_t, u_tt })
    }

    /// Samples `u(r, θ)` on the grid.
    pub fn sample<F: Fn(f64, f64) -> f64>(data: &GluedDataSet, grid: AxisymGrid, delta: f64, u: F) -> Result<Self, HarmonicError> {
        let mut values = vec![0.0; grid.len()];
        for i in 0..grid.n_r() {
            for j in 0..grid.n_theta() {
                values[grid.index(i, j)] = u(grid.radii()[i], grid.theta(j));
            }
        }
        Self::new(data, grid, values, delta)
    }

    /// Same grid and data with a different regularization.
    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..self.clone() }
    }

    pub fn grid(&self) -> &AxisymGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Node indices of the domain ends and of every interior corner.
    pub fn breaks(&self) -> &[usize] {
        &self.breaks
    }

    /// Node indices of interior corners.
    pub fn corner_nodes(&self) -> &[usize] {
        &self.breaks[1..self.breaks.len() - 1]
    }

    /// Sides on which node `i` has data (one at domain ends, two elsewhere).
    pub fn sides(&self, i: usize) -> Vec<NodeSide> {
        [NodeSide::Lower, NodeSide::Upper].into_iter().filter(|s| self.stencils[i][s.index()].is_some()).collect()
    }

    pub fn geometry(&self, i: usize, side: NodeSide) -> Option<&NodeGeometry> {
        self.geometry[i][side.index()].as_ref()
    }

    /// Coordinate derivatives at `(i, j)` from `side`; `None` at the center or
    /// on a side without data.
    pub fn derivatives(&self, i: usize, j: usize, side: NodeSide) -> Option<NodeDerivatives> {
        let st = self.stencils[i][side.index()].as_ref()?;
        self.geometry[i][side.index()].as_ref()?;
        let g = &self.grid;
        let (mut u_r, mut u_rr, mut u_rt) = (0.0, 0.0, 0.0);
        for (k, &node) in st.nodes.iter().enumerate() {
            let p = g.index(node, j);
            u_r += st.d1[k] * self.values[p];
            u_rr += st.d2[k] * self.values[p];
            u_rt += st.d1[k] * self.u_t[p];
        }
        let p = g.index(i, j);
        Some(NodeDerivatives { u: self.values[p], u_r, u_t: self.u_t[p], u_rr, u_rt, u_tt: self.u_tt[p] })
    }

    /// Radial derivative along the ray `θ_j` at node `i`, available at the center.
    pub fn radial_derivative(&self, i: usize, j: usize, side: NodeSide) -> Option<f64> {
        let st = self.stencils[i][side.index()].as_ref()?;
        Some(st.nodes.iter().zip(&st.d1).map(|(&node, w)| w * self.values[self.grid.index(node, j)]).sum())
    }

    /// Radial derivative at node `i` of a node quantity `q(node, side)`, using
    /// the stencil of `side`; neighbours are queried from the side facing `i`.
    pub(crate) fn radial_derivative_by<F: Fn(usize, NodeSide) -> Option<f64>>(&self, i: usize, side: NodeSide, q: F) -> Option<f64> {
        let st = self.stencils[i][side.index()].as_ref()?;
        let mut acc = 0.0;
        for (&node, w) in st.nodes.iter().zip(&st.d1) {
            let s = match node.cmp(&i) {
                std::cmp::Ordering::Equal => side,
                std::cmp::Ordering::Less => NodeSide::Upper,
                std::cmp::Ordering::Greater => NodeSide::Lower,
            };
            acc += w * q(node, s)?;
        }
        Some(acc)
    }

    pub fn gradient(&self, i: usize, j: usize, side: NodeSide) -> Option<Gradient> {
        let d = self.derivatives(i, j, side)?;
        let geo = self.geometry(i, side)?;
        Some(self.gradient_from(&d, geo))
    }

    pub(crate) fn gradient_from(&self, d: &NodeDerivatives, geo: &NodeGeometry) -> Gradient {
        let normal = geo.sqrt_f * d.u_r;
        let tangential = d.u_t / geo.rho;
        let norm = normal.hypot(tangential);
        Gradient { normal, tangential, norm, norm_delta: norm.hypot(self.delta) }
    }

    /// `|∇u|` at a regular center from the radial derivatives along all rays.
    pub fn center_gradient(&self) -> Option<f64> {
        if !self.grid.has_center() {
            return None;
        }
        let w = self.grid.solid_angle_weights();
        let gz: f64 = (0..self.grid.n_theta())
            .map(|j| w[j] * self.radial_derivative(0, j, NodeSide::Upper).unwrap_or(0.0) * self.grid.theta(j).cos())
            .sum::<f64>()
            * 1.5;
        Some(gz.abs())
    }

    /// `|∇u|_δ` at `(i, j)` from `side`, including the center.
    pub fn grad_norm_delta(&self, i: usize, j: usize, side: NodeSide) -> Option<f64> {
        if self.grid.radii()[i] == 0.0 {
            return self.center_gradient().map(|g| g.hypot(self.delta));
        }
        self.gradient(i, j, side).map(|g| g.norm_delta)
    }

    /// Rows `r, θ, u, |∇u|` with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,theta,u,grad_norm\n");
        for i in 0..self.grid.n_r() {
            let side = self.sides(i)[0];
            for j in 0..self.grid.n_theta() {
                let g = if self.grid.radii()[i] == 0.0 {
                    self.center_gradient().unwrap_or(0.0)
                } else {
                    self.gradient(i, j, side).map(|g| g.norm).unwrap_or(f64::NAN)
                };
                s.push_str(&format!("{},{},{},{}\n", self.grid.radii()[i], self.grid.theta(j), self.value(i, j), g));
            }
        }
        s
    }

    /// Largest excursion of interior values beyond the boundary extremes.
    pub fn max_principle_violation(&self) -> f64 {
        let g = &self.grid;
        let n = g.n_r();
        let mut bmax = f64::NEG_INFINITY;
        let mut bmin = f64::INFINITY;
        let mut imax = f64::NEG_INFINITY;
        let mut imin = f64::INFINITY;
        for i in 0..n {
            let boundary = i == n - 1 || (i == 0 && !g.has_center());
            for j in 0..g.n_theta() {
                let v = self.value(i, j);
                if boundary {
                    bmax = bmax.max(v);
                    bmin = bmin.min(v);
                } else {
                    imax = imax.max(v);
                    imin = imin.min(v);
                }
            }
        }
        (imax - bmax).max(bmin - imin).max(0.0)
    }

    /// Sphere weights `2π ∫ sin θ dθ` per polar row.
    pub fn sphere_weights(&self) -> Vec<f64> {
        self.grid.solid_angle_weights().into_iter().map(|w| 2.0 * PI * w).collect()
    }
}

fn node_geometry(patch: &crate::geometry::RadialPatch, r: f64) -> Result<NodeGeometry, HarmonicError> {
    let p = patch.point(r)?;
    let c = patch.constraints(r)?;
    let m = patch.momentum_tensor(r)?;
    Ok(NodeGeometry {
        r,
        f: p.f.value,
        df: p.f.d1,
        sqrt_f: p.sqrt_f(),
        rho: p.rho.value,
        drho: p.rho.d1,
        a: p.a.value,
        b: p.b.value,
        tr_k: p.tr_k(),
        mu: c.mu,
        j_radial: c.j_radial,
        mean_curvature: p.mean_curvature(),
        pi_nn: m.pi_nn,
    })
}

fn radial_stencil(r: &[f64], i: usize, s0: usize, s1: usize) -> Stencil {
    let nodes: Vec<usize> = if i > s0 && i < s1 {
        vec![i - 1, i, i + 1]
    } else if i == s0 {
        (s0..=(s0 + 3).min(s1)).collect()
    } else {
        (s1.saturating_sub(3).max(s0)..=s1).collect()
    };
    let xs: Vec<f64> = nodes.iter().map(|&k| r[k]).collect();
    let [_, d1, d2] = fd_weights(r[i], &xs);
    Stencil { nodes, d1, d2 }
}
