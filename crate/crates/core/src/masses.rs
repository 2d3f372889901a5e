//! Mass functionals of glued data sets and round boundary spheres.
//!
//! | function | quantity |
//! |----------|----------|
//! | [`adm_energy_momentum`] | flux-integral `(E, P)` extrapolated in `1/r`, plus Misner–Sharp cross-check |
//! | [`hawking_mass`] | `√(|Σ|/16π)(1 − (1/16π)∮H²)` by quadrature |
//! | [`quasilocal`], [`quasilocal_from_boundary`] | `W`, Brown–York, Liu–Yau |
//! | [`minimal_sphere`] | outermost coordinate sphere with `H = 0` |
//! | [`comparison_check`] | `W ≥ m_H` on sphere hulls and the Penrose bound |

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corner::{CornerError, GluedDataSet, Side};
use crate::geometry::{GeometryError, PointData, RadialPatch};
use crate::numgrid::{extrapolate_sequence, find_root, gauss_legendre, sphere_rule, ConvergenceReport, Interval, NumError};

/// Failures of mass evaluations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MassError {
    #[error("need at least {needed} radii, got {got}")]
    TooFewRadii { needed: usize, got: usize },
    #[error("radius {r} outside the outermost patch [{lo}, {hi}]")]
    RadiusOutOfRange { r: f64, lo: f64, hi: f64 },
    #[error("radii must be strictly increasing")]
    UnorderedRadii,
    #[error("non-finite flux at r = {0}")]
    NonFinite(f64),
    #[error("boundary sphere has non-positive areal radius {0}")]
    DegenerateSphere(f64),
    #[error(transparent)]
    Corner(#[from] CornerError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// Flux integrals on one coordinate sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxSample {
    pub radius: f64,
    pub energy_flux: f64,
    pub momentum_flux: [f64; 3],
    pub misner_sharp: f64,
}

/// ADM energy-momentum from extrapolated flux integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmResult {
    pub energy: f64,
    pub momentum: [f64; 3],
    pub momentum_norm: f64,
    /// `√(E² − |P|²)` when `E ≥ |P|`.
    pub mass: Option<f64>,
    pub misner_sharp_energy: f64,
    pub samples: Vec<FluxSample>,
    pub convergence: ConvergenceReport,
    pub misner_sharp_convergence: ConvergenceReport,
    /// Successive flux differences grow instead of shrinking.
    pub divergent: bool,
}

/// Quadrature resolution for sphere integrals (`cos θ` nodes, `φ` nodes).
pub const SPHERE_RULE: (usize, usize) = (12, 24);

fn cartesian_metric_derivatives(p: &PointData, n: &[f64; 3]) -> ([[f64; 3]; 3], [[[f64; 3]; 3]; 3]) {
    let s = p.r;
    let q = p.rho.value / s;
    let a = q * q;
    let da = 2.0 * q * (p.rho.d1 * s - p.rho.value) / (s * s);
    let b = 1.0 / p.f.value;
    let db = -p.f.d1 / (p.f.value * p.f.value);
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let mut g = [[0.0; 3]; 3];
    let mut dg = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = a * delta(i, j) + (b - a) * n[i] * n[j];
            for k in 0..3 {
                let dni = (delta(k, i) - n[k] * n[i]) / s;
                let dnj = (delta(k, j) - n[k] * n[j]) / s;
                dg[k][i][j] = da * n[k] * delta(i, j) + (db - da) * n[k] * n[i] * n[j] + (b - a) * (dni * n[j] + n[i] * dnj);
            }
        }
    }
    (g, dg)
}

/// Flux integrals of `data` on the coordinate sphere of radius `r`.
pub fn flux_sample(patch: &RadialPatch, r: f64) -> Result<FluxSample, MassError> {
    let p = patch.point(r)?;
    let rule = sphere_rule(SPHERE_RULE.0, SPHERE_RULE.1);
    let mut energy = 0.0;
    let mut momentum = [0.0; 3];
    let (a, b) = (p.a.value, p.b.value);
    let tr = a + 2.0 * b;
    for q in &rule {
        let n = q.normal;
        let (g, dg) = cartesian_metric_derivatives(&p, &n);
        let mut integrand = 0.0;
        for j in 0..3 {
            let mut e = 0.0;
            for i in 0..3 {
                e += dg[i][i][j] - dg[j][i][i];
            }
            integrand += e * n[j];
        }
        energy += q.weight * r * r * integrand;
        for i in 0..3 {
            let mut pi_n = 0.0;
            for j in 0..3 {
                let k_ij = b * g[i][j] + (a - b) / p.f.value * n[i] * n[j];
                pi_n += (k_ij - tr * g[i][j]) * n[j];
            }
            momentum[i] += q.weight * r * r * pi_n;
        }
    }
    let energy_flux = energy / (16.0 * PI);
    let momentum_flux = momentum.map(|v| v / (8.0 * PI));
    let misner_sharp = 0.5 * p.rho.value * (1.0 - p.f.value * p.rho.d1 * p.rho.d1);
    if !energy_flux.is_finite() || momentum_flux.iter().any(|v| !v.is_finite()) {
        return Err(MassError::NonFinite(r));
    }
    Ok(FluxSample { radius: r, energy_flux, momentum_flux, misner_sharp })
}

/// ADM energy and momentum from flux integrals on the coordinate spheres
/// `radii`, extrapolated to infinity by polynomial extrapolation in `1/r`.
pub fn adm_energy_momentum(data: &GluedDataSet, radii: &[f64]) -> Result<AdmResult, MassError> {
    if radii.len() < 2 {
        return Err(MassError::TooFewRadii { needed: 2, got: radii.len() });
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(MassError::UnorderedRadii);
    }
    let outer = data.outermost();
    let dom = outer.domain();
    for &r in radii {
        if !(r > dom.lo && r <= dom.hi) {
            return Err(MassError::RadiusOutOfRange { r, lo: dom.lo, hi: dom.hi });
        }
    }
    let samples: Vec<FluxSample> = radii.iter().map(|&r| flux_sample(outer, r)).collect::<Result<_, _>>()?;
    let h: Vec<f64> = radii.iter().map(|r| 1.0 / r).collect();
    let e: Vec<f64> = samples.iter().map(|s| s.energy_flux).collect();
    let ms: Vec<f64> = samples.iter().map(|s| s.misner_sharp).collect();
    let convergence = extrapolate_sequence(&h, &e);
    let misner_sharp_convergence = extrapolate_sequence(&h, &ms);
    let mut momentum = [0.0; 3];
    for (c, m) in momentum.iter_mut().enumerate() {
        let v: Vec<f64> = samples.iter().map(|s| s.momentum_flux[c]).collect();
        *m = extrapolate_sequence(&h, &v).extrapolated;
    }
    let divergent = e.windows(3).any(|w| (w[2] - w[1]).abs() > (w[1] - w[0]).abs() && (w[1] - w[0]).abs() > 0.0);
    let energy = convergence.extrapolated;
    let momentum_norm = (momentum[0] * momentum[0] + momentum[1] * momentum[1] + momentum[2] * momentum[2]).sqrt();
    let mass = (energy >= momentum_norm).then(|| (energy * energy - momentum_norm * momentum_norm).sqrt());
    Ok(AdmResult {
        energy,
        momentum,
        momentum_norm,
        mass,
        misner_sharp_energy: misner_sharp_convergence.extrapolated,
        samples,
        convergence,
        misner_sharp_convergence,
        divergent,
    })
}

/// Hawking mass of the coordinate sphere `r`, from the area and the
/// quadrature of `H²`.
pub fn hawking_mass(data: &GluedDataSet, r: f64, side: Option<Side>) -> Result<f64, MassError> {
    let patch = data.patch_for(r, side)?;
    let rho = patch.areal_radius(r)?;
    if !(rho > 0.0) {
        return Err(MassError::DegenerateSphere(rho));
    }
    let h = patch.mean_curvature(r)?;
    let (x, w) = gauss_legendre(SPHERE_RULE.0);
    let mut area = 0.0;
    let mut h2 = 0.0;
    for (_, wt) in x.iter().zip(&w) {
        let da = 2.0 * PI * wt * rho * rho;
        area += da;
        h2 += da * h * h;
    }
    Ok((area / (16.0 * PI)).sqrt() * (1.0 - h2 / (16.0 * PI)))
}

/// Round boundary data: areal radius, mean curvature, `tr_Σ k` and the
/// length of the tangential part of `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub r0: f64,
    pub h: f64,
    pub tr_sigma_k: f64,
    pub tangential: f64,
}

impl BoundaryData {
    /// `|ω| = √((tr_Σ k)² + |β|²)` since `π(ν,ν) = −tr_Σ k`.
    pub fn omega_norm(&self) -> f64 {
        self.tr_sigma_k.hypot(self.tangential)
    }
}

/// Hypothesis flags attached to a quasilocal evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasilocalFlags {
    pub h_exceeds_omega: bool,
    pub h_exceeds_tr_sigma_k: bool,
    pub omega_nonzero: bool,
}

/// Quasilocal masses of a round boundary sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasilocalReport {
    pub r0: f64,
    pub areal_radius: f64,
    pub h: f64,
    pub tr_sigma_k: f64,
    pub omega_norm: f64,
    pub h0: f64,
    pub w: f64,
    pub m_by: f64,
    /// Liu–Yau mass, `None` when `H ≤ |tr_Σ k|`.
    pub m_ly: Option<f64>,
    pub m_hawking: f64,
    pub flags: QuasilocalFlags,
}

impl QuasilocalReport {
    /// `W` recomputed from the stored fields.
    pub fn w_recomputed(&self) -> f64 {
        let r = self.areal_radius;
        r * r / 2.0 * (self.h0 - (self.h - self.omega_norm))
    }
}

/// `W`, Brown–York, Liu–Yau and Hawking masses from round boundary data.
pub fn quasilocal_from_boundary(data: BoundaryData) -> Result<QuasilocalReport, MassError> {
    let r = data.r0;
    if !(r > 0.0) {
        return Err(MassError::DegenerateSphere(r));
    }
    let omega = data.omega_norm();
    let h0 = 2.0 / r;
    let half_area_density = r * r / 2.0;
    let w = half_area_density * (h0 - (data.h - omega));
    let m_by = half_area_density * (h0 - data.h);
    let ly_ok = data.h > data.tr_sigma_k.abs();
    let m_ly = ly_ok.then(|| half_area_density * (h0 - (data.h * data.h - data.tr_sigma_k * data.tr_sigma_k).sqrt()));
    let m_hawking = 0.5 * r * (1.0 - r * r * data.h * data.h / 4.0);
    Ok(QuasilocalReport {
        r0: r,
        areal_radius: r,
        h: data.h,
        tr_sigma_k: data.tr_sigma_k,
        omega_norm: omega,
        h0,
        w,
        m_by,
        m_ly,
        m_hawking,
        flags: QuasilocalFlags { h_exceeds_omega: data.h > omega, h_exceeds_tr_sigma_k: ly_ok, omega_nonzero: omega > 0.0 },
    })
}

/// Boundary data of the coordinate sphere `r0` read from one side.
pub fn boundary_data(data: &GluedDataSet, r0: f64, side: Option<Side>) -> Result<BoundaryData, MassError> {
    let idx = data.patch_index(r0, side)?;
    let patch = &data.patches()[idx];
    let tangential = match (data.corner_at(r0), side) {
        (Some(c), Some(Side::Inner)) => data.interfaces()[c].omega_minus.tangential,
        (Some(c), Some(Side::Outer)) => data.interfaces()[c].omega_plus.tangential,
        _ => 0.0,
    };
    Ok(BoundaryData {
        r0: patch.areal_radius(r0)?,
        h: patch.mean_curvature(r0)?,
        tr_sigma_k: patch.momentum_tensor(r0)?.tr_sigma_k,
        tangential,
    })
}

/// Quasilocal masses of the coordinate sphere `r0` of a data set.
pub fn quasilocal(data: &GluedDataSet, r0: f64, side: Option<Side>) -> Result<QuasilocalReport, MassError> {
    let mut report = quasilocal_from_boundary(boundary_data(data, r0, side)?)?;
    report.r0 = r0;
    report.m_hawking = hawking_mass(data, r0, side)?;
    Ok(report)
}

/// Coordinate sphere with vanishing mean curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimalSphere {
    pub radius: f64,
    pub areal_radius: f64,
    pub area: f64,
}

const MINIMAL_SCAN: usize = 4000;

/// Outermost coordinate sphere where `H` changes sign, refined to root
/// tolerance. `None` when `H` keeps one sign.
pub fn minimal_sphere(data: &GluedDataSet) -> Result<Option<MinimalSphere>, MassError> {
    for patch in data.patches().iter().rev() {
        let dom = patch.domain();
        let lo = if dom.lo > 0.0 { dom.lo } else { dom.hi * 1e-6 };
        let ratio = (dom.hi / lo).ln();
        let xs: Vec<f64> = (0..=MINIMAL_SCAN)
            .map(|k| if k == MINIMAL_SCAN { dom.hi } else { lo * (ratio * k as f64 / MINIMAL_SCAN as f64).exp() })
            .collect();
        let hs: Vec<f64> = xs.iter().map(|&r| patch.mean_curvature(r)).collect::<Result<_, _>>()?;
        for k in (0..MINIMAL_SCAN).rev() {
            let root = if hs[k + 1] == 0.0 {
                Some(xs[k + 1])
            } else if hs[k] * hs[k + 1] < 0.0 {
                Some(find_root(|r| patch.mean_curvature(r).unwrap_or(f64::NAN), (xs[k], xs[k + 1]))?)
            } else {
                None
            };
            if let Some(r) = root {
                let rho = patch.areal_radius(r)?;
                return Ok(Some(MinimalSphere { radius: r, areal_radius: rho, area: 4.0 * PI * rho * rho }));
            }
        }
    }
    Ok(None)
}

/// Outcome of one comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

/// Hypotheses of the comparison theorems, as evaluated or asserted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub dec: bool,
    pub dec_min_margin: f64,
    pub h_exceeds_omega: bool,
    pub omega_nonzero: bool,
    pub topology_asserted: bool,
    /// `(∫ K^3)^{2/3}` over the region inside the boundary, `K = tr k`.
    pub k_squared_l32: f64,
}

impl Admissibility {
    /// Whether the hypotheses that gate verdicts hold. `ω ≠ 0` is recorded
    /// but not gating.
    pub fn applicable(&self) -> bool {
        self.dec && self.h_exceeds_omega && self.topology_asserted
    }
}

/// `W ≥ m_H(r)` for one hull sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullComparison {
    pub radius: f64,
    pub m_hawking: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

/// `W ≥ √(|S|/16π)` for the minimal sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenroseCheck {
    pub sphere: MinimalSphere,
    pub bound: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

/// Results of [`comparison_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub w: f64,
    pub admissibility: Admissibility,
    pub hulls: Vec<HullComparison>,
    pub penrose: Option<PenroseCheck>,
    pub failures: Vec<HullComparison>,
}

impl ComparisonReport {
    pub fn all_pass(&self) -> bool {
        self.hulls.iter().all(|h| h.verdict == Verdict::Pass)
            && self.penrose.is_none_or(|p| p.verdict == Verdict::Pass)
    }
}

const MARGIN_TOL: f64 = 1e-12;

fn grade(margin: f64, applicable: bool) -> Verdict {
    if !applicable {
        Verdict::NotApplicable
    } else if margin >= -MARGIN_TOL {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn region_admissibility(data: &GluedDataSet, r0: f64) -> Result<(bool, f64, f64), MassError> {
    let mut min_margin = f64::INFINITY;
    let mut k3 = 0.0;
    for patch in data.patches() {
        let dom = patch.domain();
        if dom.lo >= r0 {
            break;
        }
        let sub = patch.restricted(Interval::new(dom.lo, dom.hi.min(r0))?)?;
        min_margin = min_margin.min(sub.dec_check(201)?.min_margin);
        let (x, w) = gauss_legendre(24);
        let (lo, hi) = (sub.domain().lo, sub.domain().hi);
        for (xi, wi) in x.iter().zip(&w) {
            let r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xi;
            let p = sub.point(r)?;
            let dv = 4.0 * PI * p.rho.value * p.rho.value / p.sqrt_f();
            k3 += 0.5 * (hi - lo) * wi * dv * p.tr_k().abs().powi(3);
        }
    }
    Ok((min_margin >= -crate::geometry::DEC_TOLERANCE, min_margin, k3.powf(2.0 / 3.0)))
}

/// Compares `W` of the boundary in `report` with the Hawking masses of the
/// hull spheres `hull_radii` and, when a minimal sphere lies inside the
/// boundary, with `√(|S|/16π)`. Violated hypotheses turn verdicts into
/// [`Verdict::NotApplicable`].
pub fn comparison_check(report: &QuasilocalReport, data: &GluedDataSet, hull_radii: &[f64]) -> Result<ComparisonReport, MassError> {
    let (dec, dec_min_margin, k_squared_l32) = region_admissibility(data, report.r0)?;
    let admissibility = Admissibility {
        dec,
        dec_min_margin,
        h_exceeds_omega: report.flags.h_exceeds_omega,
        omega_nonzero: report.flags.omega_nonzero,
        topology_asserted: data.topology_asserted,
        k_squared_l32,
    };
    let applicable = admissibility.applicable();
    let mut hulls = Vec::with_capacity(hull_radii.len());
    for &r in hull_radii {
        let side = data.corner_at(r).map(|_| Side::Inner);
        let m_h = hawking_mass(data, r, side)?;
        let margin = report.w - m_h;
        hulls.push(HullComparison { radius: r, m_hawking: m_h, margin, verdict: grade(margin, applicable) });
    }
    let penrose = match minimal_sphere(data)? {
        Some(s) if s.radius < report.r0 => {
            let bound = (s.area / (16.0 * PI)).sqrt();
            let margin = report.w - bound;
            Some(PenroseCheck { sphere: s, bound, margin, verdict: grade(margin, applicable) })
        }
        _ => None,
    };
    let failures = hulls.iter().filter(|h| h.verdict == Verdict::Fail).copied().collect();
    Ok(ComparisonReport { w: report.w, admissibility, hulls, penrose, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corner::Scenario;

    #[test]
    fn flat_round_sphere() {
        let q = quasilocal_from_boundary(BoundaryData { r0: 2.0, h: 1.0, tr_sigma_k: 0.0, tangential: 0.0 }).unwrap();
        assert_eq!((q.w, q.m_by, q.m_ly), (0.0, 0.0, Some(0.0)));
    }

    #[test]
    fn liu_yau_example() {
        let q = quasilocal_from_boundary(BoundaryData { r0: 1.0, h: 3.0, tr_sigma_k: 1.0, tangential: 0.0 }).unwrap();
        assert!(q.w.abs() < 1e-15);
        assert!((q.m_ly.unwrap() - (1.0 - 0.5 * 8f64.sqrt())).abs() < 1e-15);
        assert!(q.w >= q.m_ly.unwrap());
        let undefined = quasilocal_from_boundary(BoundaryData { r0: 1.0, h: 1.0, tr_sigma_k: 2.0, tangential: 0.0 }).unwrap();
        assert!(undefined.m_ly.is_none() && !undefined.flags.h_exceeds_tr_sigma_k);
    }

    #[test]
    fn schwarzschild_brown_york() {
        let set = Scenario::Schwarzschild { m: 1.0, r_in: 3.0 }.build().unwrap();
        let q = quasilocal(&set, 4.0, None).unwrap();
        assert!((q.m_by - 4.0 * (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
        assert!((q.m_hawking - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hawking_mass_values() {
        let flat = Scenario::Flat.build().unwrap();
        assert!(hawking_mass(&flat, 7.0, None).unwrap().abs() < 1e-14);
        let hyp = Scenario::HyperbolicNegschw { sign: 1.0 }.build().unwrap();
        assert!((hawking_mass(&hyp, 1.0, Some(Side::Inner)).unwrap() + 0.5).abs() < 1e-14);
        assert!(hawking_mass(&hyp, 1.0, None).is_err());
    }

    #[test]
    fn minimal_spheres() {
        let iso = Scenario::IsotropicSchwarzschild { m: 1.0, s_in: 0.25 }.build().unwrap();
        let s = minimal_sphere(&iso).unwrap().unwrap();
        assert!((s.radius - 0.5).abs() < 1e-10);
        assert!((s.area - 16.0 * PI).abs() < 1e-8);
        assert!(minimal_sphere(&Scenario::Flat.build().unwrap()).unwrap().is_none());
        assert!(minimal_sphere(&Scenario::Schwarzschild { m: 1.0, r_in: 3.0 }.build().unwrap()).unwrap().is_none());
    }

    #[test]
    fn flat_adm() {
        let flat = Scenario::Flat.build().unwrap();
        let adm = adm_energy_momentum(&flat, &[50.0, 100.0, 200.0]).unwrap();
        assert_eq!(adm.energy, 0.0);
        assert_eq!(adm.momentum_norm, 0.0);
    }
}
