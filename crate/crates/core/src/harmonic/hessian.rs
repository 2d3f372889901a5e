//! Covariant and spacetime Hessians in the orthonormal frame
//! `e₁ = √f ∂_r`, `e₂ = ρ⁻¹ ∂_θ`, `e₃ = (ρ sin θ)⁻¹ ∂_φ`.

use serde::{Deserialize, Serialize};

use super::field::{AxisymField, NodeDerivatives, NodeGeometry, NodeSide};

/// Frame components `(11, 12, 22, 33)` of a symmetric tensor that is
/// diagonal in `e₃` by axisymmetry.
pub type FrameTensor = [f64; 4];

/// Frame norm `|T|² = T₁₁² + 2T₁₂² + T₂₂² + T₃₃²`.
pub fn frame_norm_sq(t: &FrameTensor) -> f64 {
    t[0] * t[0] + 2.0 * t[1] * t[1] + t[2] * t[2] + t[3] * t[3]
}

/// `∇∇u` in the frame from coordinate derivatives. On the axis
/// `cot θ ∂_θ u` is replaced by its limit `∂²_θ u`.
pub fn covariant_hessian(d: &NodeDerivatives, geo: &NodeGeometry, theta: f64) -> FrameTensor {
    let (f, rho, drho) = (geo.f, geo.rho, geo.drho);
    let h11 = f * d.u_rr + 0.5 * geo.df * d.u_r;
    let h12 = geo.sqrt_f * (d.u_rt - drho / rho * d.u_t) / rho;
    let h22 = (d.u_tt + f * rho * drho * d.u_r) / (rho * rho);
    let s = theta.sin();
    let polar = if s.abs() < 1e-12 { d.u_tt } else { theta.cos() / s * d.u_t };
    let h33 = f * drho * d.u_r / rho + polar / (rho * rho);
    [h11, h12, h22, h33]
}

/// Second fundamental form `k = diag(a, b, b)` in the frame.
pub fn k_frame(geo: &NodeGeometry) -> FrameTensor {
    [geo.a, 0.0, geo.b, geo.b]
}

/// Hessians at one node and side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianSample {
    pub i: usize,
    pub j: usize,
    pub side: NodeSide,
    pub hessian: FrameTensor,
    pub spacetime: FrameTensor,
    pub grad_norm: f64,
    pub grad_norm_delta: f64,
    /// `|∇̄∇̄u|²`.
    pub norm_sq: f64,
}

/// `∇̄∇̄u = ∇∇u + |∇u| k` at every node with data (the center is skipped).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeHessianField {
    pub samples: Vec<HessianSample>,
}

impl SpacetimeHessianField {
    /// `max |∇̄∇̄u − ∇∇u − |∇u| k|` over nodes, frame components.
    pub fn identity_residual(&self, field: &AxisymField) -> f64 {
        let mut worst: f64 = 0.0;
        for s in &self.samples {
            let Some(geo) = field.geometry(s.i, s.side) else { continue };
            let k = k_frame(geo);
            for c in 0..4 {
                worst = worst.max((s.spacetime[c] - s.hessian[c] - s.grad_norm * k[c]).abs());
            }
        }
        worst
    }

    pub fn max_norm_sq(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sq).fold(0.0, f64::max)
    }
}

/// Spacetime Hessian at `(i, j)` from `side`.
pub fn hessian_at(field: &AxisymField, i: usize, j: usize, side: NodeSide) -> Option<HessianSample> {
    let d = field.derivatives(i, j, side)?;
    let geo = field.geometry(i, side)?;
    let grad = field.gradient_from(&d, geo);
    let hessian = covariant_hessian(&d, geo, field.grid().theta(j));
    let k = k_frame(geo);
    let mut spacetime = hessian;
    for c in 0..4 {
        spacetime[c] += grad.norm * k[c];
    }
    Some(HessianSample {
        i,
        j,
        side,
        hessian,
        spacetime,
        grad_norm: grad.norm,
        grad_norm_delta: grad.norm_delta,
        norm_sq: frame_norm_sq(&spacetime),
    })
}

/// Spacetime Hessian at every node and available side.
pub fn spacetime_hessian(field: &AxisymField) -> SpacetimeHessianField {
    let g = field.grid();
    let mut samples = Vec::with_capacity(g.len());
    for i in 0..g.n_r() {
        for side in field.sides(i) {
            for j in 0..g.n_theta() {
                if let Some(s) = hessian_at(field, i, j, side) {
                    samples.push(s);
                }
            }
        }
    }
    SpacetimeHessianField { samples }
}
