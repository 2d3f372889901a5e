//! Axisymmetric `(r, θ)` grids and finite-difference stencils on them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::NumError;

/// Tensor grid of radial nodes and `M` uniform polar cells on `[0, π]`.
///
/// Node `(i, j)` sits at radius `r[i]` and polar angle `θ_j = jπ/M`; rows
/// `j = 0` and `j = M` are the symmetry axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisymGrid {
    r: Vec<f64>,
    m: usize,
}

impl AxisymGrid {
    pub const MIN_RADIAL_NODES: usize = 8;
    pub const MIN_THETA_CELLS: usize = 8;

    pub fn new(r: Vec<f64>, theta_cells: usize) -> Result<Self, NumError> {
        if r.len() < Self::MIN_RADIAL_NODES {
            return Err(NumError::Grid(format!("need at least {} radial nodes, got {}", Self::MIN_RADIAL_NODES, r.len())));
        }
        if theta_cells < Self::MIN_THETA_CELLS {
            return Err(NumError::Grid(format!("need at least {} polar cells, got {theta_cells}", Self::MIN_THETA_CELLS)));
        }
        if r[0] < 0.0 || r.iter().any(|v| !v.is_finite()) || r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(NumError::Grid("radial nodes must be finite, non-negative and strictly increasing".into()));
        }
        Ok(Self { r, m: theta_cells })
    }

    /// Radial nodes from `r_in` to `r_out` following
    /// `r = r_in + s·sinh(αξ)` for uniform `ξ`, so spacing is nearly uniform
    /// below the scale `s` and geometric beyond it. Every breakpoint is
    /// placed exactly on a node and each segment between breakpoints
    /// receives at least two intervals.
    pub fn stretched(
        r_in: f64,
        r_out: f64,
        breakpoints: &[f64],
        radial_intervals: usize,
        theta_cells: usize,
        scale: f64,
    ) -> Result<Self, NumError> {
        if !(r_out > r_in) || r_in < 0.0 || !(scale > 0.0) {
            return Err(NumError::Grid(format!("invalid stretched grid [{r_in}, {r_out}] with scale {scale}")));
        }
        let alpha = ((r_out - r_in) / scale).asinh();
        let to_xi = |r: f64| ((r - r_in) / scale).asinh() / alpha;
        let from_xi = |xi: f64| r_in + scale * (alpha * xi).sinh();
        let mut cuts: Vec<f64> = vec![r_in];
        for &b in breakpoints {
            if b <= r_in || b >= r_out {
                return Err(NumError::Grid(format!("breakpoint {b} outside ({r_in}, {r_out})")));
            }
            cuts.push(b);
        }
        cuts.push(r_out);
        if cuts.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(NumError::Grid("breakpoints must be strictly increasing".into()));
        }
        let mut r = vec![r_in];
        for w in cuts.windows(2) {
            let (xa, xb) = (to_xi(w[0]), to_xi(w[1]));
            let n = (((xb - xa) * radial_intervals as f64).round() as usize).max(2);
            for k in 1..=n {
                let node = if k == n { w[1] } else { from_xi(xa + (xb - xa) * k as f64 / n as f64) };
                r.push(node);
            }
        }
        Self::new(r, theta_cells)
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn n_r(&self) -> usize {
        self.r.len()
    }

    pub fn theta_cells(&self) -> usize {
        self.m
    }

    pub fn n_theta(&self) -> usize {
        self.m + 1
    }

    pub fn len(&self) -> usize {
        self.n_r() * self.n_theta()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtheta(&self) -> f64 {
        PI / self.m as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        if j == self.m {
            PI
        } else {
            j as f64 * PI / self.m as f64
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * (self.m + 1) + j
    }

    pub fn has_center(&self) -> bool {
        self.r[0] == 0.0
    }

    /// Index of the node equal to `r` (relative tolerance 1e-12).
    pub fn node_at(&self, r: f64) -> Option<usize> {
        let tol = 1e-12 * r.abs().max(1.0);
        self.r.iter().position(|&v| (v - r).abs() <= tol)
    }

    /// Exact `∫ sin θ dθ` over the polar cell of each row (axis rows hold half cells).
    pub fn solid_angle_weights(&self) -> Vec<f64> {
        let h = 0.5 * self.dtheta();
        (0..=self.m)
            .map(|j| {
                if j == 0 || j == self.m {
                    1.0 - h.cos()
                } else {
                    2.0 * self.theta(j).sin() * h.sin()
                }
            })
            .collect()
    }

    /// Solid-angle weights used by the flux discretization. Axis rows carry a
    /// `1 + O(Δθ²)` correction that makes the discrete flat Laplacian exact
    /// on `r·cos θ`.
    pub fn operator_solid_angles(&self) -> Vec<f64> {
        let h = 0.5 * self.dtheta();
        let mut w = self.solid_angle_weights();
        let factor = (1.0 + h.cos()) / (2.0 * h.cos());
        w[0] *= factor;
        w[self.m] *= factor;
        w
    }
}

/// Weights of the three-point Lagrange first and second derivative at `x`.
pub fn lagrange3(x: f64, nodes: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let [x0, x1, x2] = nodes;
    let d0 = (x0 - x1) * (x0 - x2);
    let d1 = (x1 - x0) * (x1 - x2);
    let d2 = (x2 - x0) * (x2 - x1);
    let first = [((x - x1) + (x - x2)) / d0, ((x - x0) + (x - x2)) / d1, ((x - x0) + (x - x1)) / d2];
    let second = [2.0 / d0, 2.0 / d1, 2.0 / d2];
    (first, second)
}

/// Finite-difference weights for the value, first and second derivative at
/// `x0` from arbitrary distinct nodes (Fornberg's recursion).
pub fn fd_weights(x0: f64, nodes: &[f64]) -> [Vec<f64>; 3] {
    let n = nodes.len();
    let mut c = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    if n == 0 {
        return c;
    }
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(2);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Polar derivatives of row data `v_j` with stencils that are exact on
/// `1, cos θ, sin θ`; axis rows use even reflection.
pub fn theta_derivatives(v: &[f64], dtheta: f64) -> (Vec<f64>, Vec<f64>) {
    let m = v.len() - 1;
    let c1 = 1.0 / (2.0 * dtheta.sin());
    let c2 = 1.0 / (2.0 * (1.0 - dtheta.cos()));
    let mut d1 = vec![0.0; m + 1];
    let mut d2 = vec![0.0; m + 1];
    for j in 0..=m {
        let (lo, hi) = match j {
            0 => (v[1], v[1]),
            j if j == m => (v[m - 1], v[m - 1]),
            _ => (v[j - 1], v[j + 1]),
        };
        d1[j] = if j == 0 || j == m { 0.0 } else { (hi - lo) * c1 };
        d2[j] = (hi - 2.0 * v[j] + lo) * c2;
    }
    (d1, d2)
}
