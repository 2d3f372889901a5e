//! Numerical checks of the bulk integral formula on an annulus and of the
//! boundary flux identity on a coordinate sphere.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bound::bulk_density;
use super::field::{AxisymField, NodeDerivatives, NodeGeometry, NodeSide};
use super::hessian::covariant_hessian;
use super::HarmonicError;
use crate::corner::{GluedDataSet, Side};

/// Both sides of the bulk integral formula on `r_inner ≤ r ≤ r_outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralFormulaReport {
    pub r_inner: f64,
    pub r_outer: f64,
    /// `∫ ½|∇̄∇̄u|²/|∇u|_δ + μ|∇u| + ⟨J, ∇u⟩`.
    pub lhs: f64,
    /// `∮ ∂_ν|∇u|_δ` over both boundary spheres.
    pub normal_flux: f64,
    /// `∮ k(∇u, ν)` over both boundary spheres.
    pub k_flux: f64,
    /// `½∫∫R_{Σ_t}` from Gauss–Bonnet on the level sets.
    pub level_set_term: f64,
    /// `2π ∫ χ(Σ_t) dt`, counted through axis crossings.
    pub euler_part: f64,
    /// `−∫∫ κ_g ds dt` along the boundary circles.
    pub geodesic_part: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub defect: f64,
    /// Volume fraction where `|∇u| < δ`.
    pub critical_measure: f64,
}

/// Terms of the boundary flux identity on one sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFormulaReport {
    pub r_c: f64,
    pub side: Side,
    /// `∮ ∂_ν|∇u| + k(∇u, ν)` with `∂_ν|∇u|` differenced along rays.
    pub lhs: f64,
    /// `∮ (Δu + K|∇u|) ν(u)/|∇u|`, zero for exact solutions.
    pub equation_defect: f64,
    /// `∮ π(∇u, ν) − H|∇u|`.
    pub momentum_mean_curvature: f64,
    /// `∫∫ κ ds dt = ∮ κ|∇_Σ η|`.
    pub geodesic_curvature: f64,
    /// `∮ −ν(u)Δ_Σ η/|∇u| + ∇_Σ η(ν(u))/|∇u|`.
    pub tangential: f64,
    /// `∮ −ν(u)⟨∇_{τ'}τ', ∇_Σ η⟩/|∇u|`.
    pub curve_acceleration: f64,
    pub rhs: f64,
    pub discrepancy: f64,
    /// Largest pointwise difference of the integrands.
    pub max_pointwise: f64,
    /// Area fraction where `|∇u| < δ`, excluded from both sides.
    pub excluded_measure: f64,
    /// Excluded area above one percent.
    pub flagged: bool,
}

impl BoundaryFormulaReport {
    pub fn rhs_recomputed(&self) -> f64 {
        self.equation_defect + self.momentum_mean_curvature + self.geodesic_curvature + self.tangential + self.curve_acceleration
    }
}

fn locate(field: &AxisymField, r: f64) -> Result<usize, HarmonicError> {
    field.grid().node_at(r).ok_or_else(|| HarmonicError::Region(format!("r = {r} is not a grid node")))
}

fn segment_of(field: &AxisymField, i: usize, side: NodeSide) -> Option<(usize, usize)> {
    let b = field.breaks();
    b.windows(2).map(|w| (w[0], w[1])).find(|&(s0, s1)| match side {
        NodeSide::Lower => i > s0 && i <= s1,
        NodeSide::Upper => i >= s0 && i < s1,
    })
}

fn polar_term(theta: f64, u_t: f64, u_tt: f64) -> f64 {
    let s = theta.sin();
    if s.abs() < 1e-12 {
        u_tt
    } else {
        theta.cos() / s * u_t
    }
}

/// `∂_r|∇u|_δ` from the jet at one node.
fn radial_derivative_of_norm(d: &NodeDerivatives, geo: &NodeGeometry, norm_delta: f64) -> f64 {
    let rho = geo.rho;
    (geo.f * d.u_r * d.u_rr + 0.5 * geo.df * d.u_r * d.u_r + d.u_t * d.u_rt / (rho * rho)
        - d.u_t * d.u_t * geo.drho / (rho * rho * rho))
        / norm_delta
}

/// Checks the bulk integral formula on the annulus `[r_inner, r_outer]`
/// (a ball when `r_inner = 0`), which must lie in one smooth segment.
pub fn integral_formula_check(
    data: &GluedDataSet,
    field: &AxisymField,
    r_inner: f64,
    r_outer: f64,
) -> Result<IntegralFormulaReport, HarmonicError> {
    let g = field.grid();
    let r = g.radii();
    let ia = locate(field, r_inner)?;
    let ib = locate(field, r_outer)?;
    if ib < ia + 2 {
        return Err(HarmonicError::Region("annulus needs at least two radial intervals".into()));
    }
    if field.breaks().iter().any(|&c| c > ia && c < ib) {
        return Err(HarmonicError::Region("annulus crosses a corner".into()));
    }
    let pa = data.patch_index(0.5 * (r[ia] + r[ia + 1]), None)?;
    let pb = data.patch_index(0.5 * (r[ib - 1] + r[ib]), None)?;
    if pa != pb {
        return Err(HarmonicError::Region("annulus spans two patches".into()));
    }
    let w = field.sphere_weights();
    let delta = field.delta();
    let nt = g.n_theta();

    let mut lhs = 0.0;
    let mut volume = 0.0;
    let mut critical = 0.0;
    let node_term = |i: usize, side: NodeSide| -> (f64, f64, f64) {
        let Some(geo) = field.geometry(i, side) else { return (0.0, 0.0, 0.0) };
        let jac = geo.rho * geo.rho / geo.sqrt_f;
        let (mut acc, mut vol, mut crit) = (0.0, 0.0, 0.0);
        for j in 0..nt {
            let dv = w[j] * jac;
            vol += dv;
            if let Some(v) = bulk_density(field, i, j, side) {
                acc += 0.5 * v * dv;
            }
            if field.gradient(i, j, side).is_some_and(|gr| gr.norm < delta) {
                crit += dv;
            }
        }
        (acc, vol, crit)
    };
    for k in ia..ib {
        let h = r[k + 1] - r[k];
        let (a0, v0, c0) = node_term(k, NodeSide::Upper);
        let (a1, v1, c1) = node_term(k + 1, NodeSide::Lower);
        lhs += 0.5 * h * (a0 + a1);
        volume += 0.5 * h * (v0 + v1);
        critical += 0.5 * h * (c0 + c1);
    }

    let mut normal_flux = 0.0;
    let mut k_flux = 0.0;
    let mut geodesic_part = 0.0;
    let spheres: Vec<(usize, NodeSide, f64)> = if r[ia] > 0.0 {
        vec![(ia, NodeSide::Upper, -1.0), (ib, NodeSide::Lower, 1.0)]
    } else {
        vec![(ib, NodeSide::Lower, 1.0)]
    };
    let dt = g.dtheta();
    for &(i, side, n_out) in &spheres {
        let geo = field.geometry(i, side).ok_or_else(|| HarmonicError::Region("sphere without data".into()))?;
        let rho = geo.rho;
        let mut turning = 0.0;
        for j in 0..nt {
            let d = field.derivatives(i, j, side).ok_or_else(|| HarmonicError::Region("sphere without data".into()))?;
            let gr = field.gradient_from(&d, geo);
            let area = w[j] * rho * rho;
            normal_flux += area * n_out * geo.sqrt_f * radial_derivative_of_norm(&d, geo, gr.norm_delta);
            k_flux += area * n_out * geo.a * gr.normal;
            let theta = g.theta(j);
            let tw = if j == 0 || j == nt - 1 { 0.5 * dt } else { dt };
            if gr.norm > 0.0 {
                let ds = n_out * geo.sqrt_f * d.u_t * (d.u_t * geo.drho * theta.sin() / rho - d.u_r * theta.cos()) / gr.norm;
                turning += tw * ds;
            }
        }
        geodesic_part -= 2.0 * PI * turning;
    }

    let mut axis = 0.0;
    for jaxis in [0, nt - 1] {
        let slope = |i: usize| -> f64 {
            let side = if i == ib { NodeSide::Lower } else { NodeSide::Upper };
            field.radial_derivative(i, jaxis, side).unwrap_or(0.0).abs()
        };
        for k in ia..ib {
            let h = r[k + 1] - r[k];
            axis += 0.5 * h * (slope(k) + slope(k + 1));
        }
    }
    let euler_part = 2.0 * PI * axis;
    let level_set_term = euler_part + geodesic_part;
    let rhs = normal_flux + k_flux + level_set_term;
    Ok(IntegralFormulaReport {
        r_inner: r[ia],
        r_outer: r[ib],
        lhs,
        normal_flux,
        k_flux,
        level_set_term,
        euler_part,
        geodesic_part,
        rhs,
        defect: rhs - lhs,
        critical_measure: if volume > 0.0 { critical / volume } else { 0.0 },
    })
}

/// Evaluates both sides of the boundary flux identity on the sphere `r_c`,
/// with `Ω` on the given side (`Side::Inner` means `Ω` lies inside).
pub fn boundary_formula_check(field: &AxisymField, r_c: f64, side: Side) -> Result<BoundaryFormulaReport, HarmonicError> {
    let g = field.grid();
    let i = locate(field, r_c)?;
    let (nside, n_out) = match side {
        Side::Inner => (NodeSide::Lower, 1.0),
        Side::Outer => (NodeSide::Upper, -1.0),
    };
    segment_of(field, i, nside).ok_or_else(|| HarmonicError::Region(format!("no data on the {side:?} side of r = {r_c}")))?;
    let geo = *field.geometry(i, nside).ok_or_else(|| HarmonicError::Region("sphere without data".into()))?;
    if !(geo.rho > 0.0) {
        return Err(HarmonicError::Region("degenerate sphere".into()));
    }
    let w = field.sphere_weights();
    let delta = field.delta();
    let rho = geo.rho;
    let h_nu = n_out * geo.mean_curvature;
    let norm_at = |node: usize, s: NodeSide, j: usize| field.gradient(node, j, s).map(|gr| gr.norm);

    let mut terms = [0.0; 5];
    let mut lhs = 0.0;
    let mut max_pointwise: f64 = 0.0;
    let mut excluded = 0.0;
    let mut total = 0.0;
    for j in 0..g.n_theta() {
        let theta = g.theta(j);
        let area = w[j] * rho * rho;
        total += area;
        let d = field.derivatives(i, j, nside).ok_or_else(|| HarmonicError::Region("sphere without data".into()))?;
        let gr = field.gradient_from(&d, &geo);
        if gr.norm < delta || gr.norm == 0.0 {
            excluded += area;
            continue;
        }
        let norm = gr.norm;
        let nu_u = n_out * gr.normal;
        let d_norm = field
            .radial_derivative_by(i, nside, |node, s| norm_at(node, s, j))
            .ok_or_else(|| HarmonicError::Region("radial stencil leaves the data".into()))?;
        let lhs_j = n_out * geo.sqrt_f * d_norm + geo.a * nu_u;

        let hess = covariant_hessian(&d, &geo, theta);
        let laplacian = hess[0] + hess[2] + hess[3];
        let t0 = (laplacian + geo.tr_k * norm) * nu_u / norm;
        let t1 = geo.pi_nn * nu_u - h_nu * norm;
        let eta_t = d.u_t;
        let polar = polar_term(theta, eta_t, d.u_tt);
        let grad_sigma_sq = eta_t * eta_t / (rho * rho);
        let accel_dot_grad = -polar / (rho * rho);
        let t2 = grad_sigma_sq / norm * 0.5 * h_nu + nu_u / norm * accel_dot_grad;
        let lap_sigma = (d.u_tt + polar) / (rho * rho);
        let d_theta_nu = n_out * geo.sqrt_f * d.u_rt;
        let t3 = -nu_u * lap_sigma / norm + eta_t / (rho * rho) * d_theta_nu / norm;
        let t4 = -nu_u / norm * accel_dot_grad;
        let pointwise = [t0, t1, t2, t3, t4];
        for (acc, t) in terms.iter_mut().zip(pointwise) {
            *acc += area * t;
        }
        lhs += area * lhs_j;
        max_pointwise = max_pointwise.max((lhs_j - pointwise.iter().sum::<f64>()).abs());
    }
    let rhs: f64 = terms.iter().sum();
    let excluded_measure = if total > 0.0 { excluded / total } else { 0.0 };
    Ok(BoundaryFormulaReport {
        r_c: g.radii()[i],
        side,
        lhs,
        equation_defect: terms[0],
        momentum_mean_curvature: terms[1],
        geodesic_curvature: terms[2],
        tangential: terms[3],
        curve_acceleration: terms[4],
        rhs,
        discrepancy: lhs - rhs,
        max_pointwise,
        excluded_measure,
        flagged: excluded_measure > 0.01,
    })
}
