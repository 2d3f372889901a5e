//! Spherically symmetric initial-data patches and their pointwise geometry.
//!
//! A patch carries the metric `g = f(r)⁻¹dr² + ρ(r)²dΩ²` and the symmetric
//! tensor `k = a·ν♭⊗ν♭ + b·(g − ν♭⊗ν♭)` with `ν = √f ∂_r` the outward unit
//! normal of the coordinate spheres. The areal radius `ρ` defaults to `r`;
//! other choices allow charts such as isotropic Schwarzschild where `r` is
//! not areal.
//!
//! With `' = d/dr`, `ρ_l = √f ρ'` and `ρ_ll = fρ'' + ½f'ρ'`:
//!
//! | quantity | formula |
//! |----------|---------|
//! | `R` | `2(1 − ρ_l²)/ρ² − 4ρ_ll/ρ` |
//! | `H` | `2ρ_l/ρ` |
//! | `μ` | `½(R + (a + 2b)² − a² − 2b²)` |
//! | `J(ν)` | `−2√f b' + (a − b)H` |
//! | `π(ν,ν)`, `π` tangential | `−2b`, `−a − b` |
//! | `θ±` | `H ± 2b` |
//!
//! `J = div π` with `π = k − (tr k)g`; only its `ν` component can be
//! nonzero, and a positive value points toward increasing `r`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numgrid::{Interval, Jet, NumError, ScalarProfile};

/// Failures of patch construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("radius {r} outside patch domain [{lo}, {hi}]")]
    OutOfDomain { r: f64, lo: f64, hi: f64 },
    #[error("metric coefficient f = {value} is not positive at r = {r}")]
    NonPositiveMetric { r: f64, value: f64 },
    #[error("irregular center: {0}")]
    IrregularCenter(String),
    #[error("invalid patch: {0}")]
    Invalid(String),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// Tolerance for `dec_check` verdicts.
pub const DEC_TOLERANCE: f64 = 1e-10;

const VALIDATION_SAMPLES: usize = 257;

/// One smooth rotationally symmetric data patch on a radius interval.
#[derive(Debug, Clone)]
pub struct RadialPatch {
    f: ScalarProfile,
    a: ScalarProfile,
    b: ScalarProfile,
    areal: Option<ScalarProfile>,
    domain: Interval,
}

/// Raw profile values at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointData {
    pub r: f64,
    pub f: Jet,
    pub rho: Jet,
    pub a: Jet,
    pub b: Jet,
}

impl PointData {
    pub fn sqrt_f(&self) -> f64 {
        self.f.value.sqrt()
    }

    /// `|∇ρ| = √f ρ'`.
    pub fn rho_l(&self) -> f64 {
        self.sqrt_f() * self.rho.d1
    }

    pub fn rho_ll(&self) -> f64 {
        self.f.value * self.rho.d2 + 0.5 * self.f.d1 * self.rho.d1
    }

    pub fn scalar_curvature(&self) -> f64 {
        let rho = self.rho.value;
        let rl = self.rho_l();
        2.0 * (1.0 - rl * rl) / (rho * rho) - 4.0 * self.rho_ll() / rho
    }

    pub fn mean_curvature(&self) -> f64 {
        2.0 * self.rho_l() / self.rho.value
    }

    pub fn tr_k(&self) -> f64 {
        self.a.value + 2.0 * self.b.value
    }

    pub fn k_norm_sq(&self) -> f64 {
        self.a.value * self.a.value + 2.0 * self.b.value * self.b.value
    }

    pub fn energy_density(&self) -> f64 {
        let tr = self.tr_k();
        0.5 * (self.scalar_curvature() + tr * tr - self.k_norm_sq())
    }

    pub fn radial_current(&self) -> f64 {
        -2.0 * self.sqrt_f() * self.b.d1 + (self.a.value - self.b.value) * self.mean_curvature()
    }
}

/// Scalar curvature, constraint densities and the DEC margin at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSample {
    pub radius: f64,
    pub scalar_curvature: f64,
    pub mu: f64,
    pub j_radial: f64,
    pub dec_margin: f64,
}

/// Conjugate momentum `π = k − (tr k)g` in the adapted frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumTensorSample {
    pub radius: f64,
    pub pi_nn: f64,
    pub pi_tan: f64,
    pub tr_k: f64,
    pub tr_sigma_k: f64,
}

/// Null expansions of a coordinate sphere and their classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullExpansions {
    pub radius: f64,
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub weakly_outer_trapped: bool,
    pub weakly_inner_trapped: bool,
    pub marginally_outer_trapped: bool,
}

/// Minimum of `μ − |J|` over uniform samples of a patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecReport {
    pub min_margin: f64,
    pub radius: f64,
    pub samples: usize,
    pub tolerance: f64,
    pub holds: bool,
}

impl RadialPatch {
    /// Patch with areal radius equal to the coordinate `r`.
    pub fn new(f: ScalarProfile, a: ScalarProfile, b: ScalarProfile, domain: Interval) -> Result<Self, GeometryError> {
        Self::build(f, a, b, None, domain)
    }

    /// Patch with an explicit areal-radius profile `ρ(r)`.
    pub fn with_areal_radius(
        f: ScalarProfile,
        a: ScalarProfile,
        b: ScalarProfile,
        areal: ScalarProfile,
        domain: Interval,
    ) -> Result<Self, GeometryError> {
        Self::build(f, a, b, Some(areal), domain)
    }

    /// Time-symmetric patch (`k = 0`).
    pub fn time_symmetric(f: ScalarProfile, domain: Interval) -> Result<Self, GeometryError> {
        let zero = ScalarProfile::constant(0.0, domain);
        Self::new(f, zero.clone(), zero, domain)
    }

    fn build(
        f: ScalarProfile,
        a: ScalarProfile,
        b: ScalarProfile,
        areal: Option<ScalarProfile>,
        domain: Interval,
    ) -> Result<Self, GeometryError> {
        if domain.lo < 0.0 || !(domain.hi > domain.lo) {
            return Err(GeometryError::Invalid(format!("domain [{}, {}]", domain.lo, domain.hi)));
        }
        let patch = Self { f, a, b, areal, domain };
        for k in 0..VALIDATION_SAMPLES {
            let r = domain.lo + domain.width() * k as f64 / (VALIDATION_SAMPLES - 1) as f64;
            let p = patch.raw(r)?;
            if !(p.f.value > 0.0) || !p.f.value.is_finite() {
                return Err(GeometryError::NonPositiveMetric { r, value: p.f.value });
            }
            if ![p.a.value, p.b.value, p.rho.value].iter().all(|v| v.is_finite()) {
                return Err(GeometryError::Invalid(format!("non-finite data at r = {r}")));
            }
            if r > 0.0 && !(p.rho.value > 0.0) {
                return Err(GeometryError::Invalid(format!("areal radius not positive at r = {r}")));
            }
        }
        if domain.lo == 0.0 {
            let p = patch.raw(0.0)?;
            if p.rho.value.abs() > 1e-12 {
                return Err(GeometryError::IrregularCenter(format!("areal radius {} at r = 0", p.rho.value)));
            }
            let slope = p.sqrt_f() * p.rho.d1;
            if (slope - 1.0).abs() > 1e-10 {
                return Err(GeometryError::IrregularCenter(format!("|∇ρ| = {slope} at r = 0 (conical)")));
            }
        }
        Ok(patch)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn f(&self) -> &ScalarProfile {
        &self.f
    }

    pub fn a(&self) -> &ScalarProfile {
        &self.a
    }

    pub fn b(&self) -> &ScalarProfile {
        &self.b
    }

    pub fn areal_profile(&self) -> Option<&ScalarProfile> {
        self.areal.as_ref()
    }

    pub fn has_center(&self) -> bool {
        self.domain.lo == 0.0
    }

    /// Copy of the patch on a sub-interval (or, for analytic profiles, a
    /// wider interval).
    pub fn restricted(&self, domain: Interval) -> Result<Self, GeometryError> {
        Self::build(
            self.f.with_domain(domain),
            self.a.with_domain(domain),
            self.b.with_domain(domain),
            self.areal.as_ref().map(|p| p.with_domain(domain)),
            domain,
        )
    }

    fn check(&self, r: f64) -> Result<(), GeometryError> {
        if self.domain.contains(r) {
            Ok(())
        } else {
            Err(GeometryError::OutOfDomain { r, lo: self.domain.lo, hi: self.domain.hi })
        }
    }

    fn raw(&self, r: f64) -> Result<PointData, GeometryError> {
        self.check(r)?;
        Ok(self.raw_extended(r))
    }

    /// Profile values without the domain check.
    pub fn raw_extended(&self, r: f64) -> PointData {
        let rho = match &self.areal {
            Some(p) => p.eval_extended(r),
            None => Jet::new(r, 1.0, 0.0),
        };
        PointData { r, f: self.f.eval_extended(r), rho, a: self.a.eval_extended(r), b: self.b.eval_extended(r) }
    }

    /// Profile values at `r`.
    pub fn point(&self, r: f64) -> Result<PointData, GeometryError> {
        self.raw(r)
    }

    pub fn areal_radius(&self, r: f64) -> Result<f64, GeometryError> {
        Ok(self.raw(r)?.rho.value)
    }

    fn center_scale(&self) -> f64 {
        0.02 * self.domain.hi.min(1.0)
    }

    fn near_center(&self, r: f64) -> bool {
        self.has_center() && r < self.center_scale()
    }

    /// Evaluates `q` at `r`. Near a regular center `q` is treated as
    /// `r^parity·(c₀ + c₁r² + c₂r⁴)` fitted through `r = h, 2h, 3h`.
    fn with_center_limit<F: Fn(&PointData) -> f64>(&self, r: f64, parity: i32, q: F) -> Result<f64, GeometryError> {
        self.check(r)?;
        if !self.near_center(r) {
            return Ok(q(&self.raw(r)?));
        }
        let h = self.center_scale();
        let xs = [h * h, 4.0 * h * h, 9.0 * h * h];
        let vs: Vec<f64> = (1..=3)
            .map(|k| {
                let rk = k as f64 * h;
                q(&self.raw_extended(rk)) / rk.powi(parity)
            })
            .collect();
        let x = r * r;
        let l0 = (x - xs[1]) * (x - xs[2]) / ((xs[0] - xs[1]) * (xs[0] - xs[2]));
        let l1 = (x - xs[0]) * (x - xs[2]) / ((xs[1] - xs[0]) * (xs[1] - xs[2]));
        let l2 = (x - xs[0]) * (x - xs[1]) / ((xs[2] - xs[0]) * (xs[2] - xs[1]));
        Ok(r.powi(parity) * (l0 * vs[0] + l1 * vs[1] + l2 * vs[2]))
    }

    pub fn scalar_curvature(&self, r: f64) -> Result<f64, GeometryError> {
        self.with_center_limit(r, 0, PointData::scalar_curvature)
    }

    /// Mean curvature of the coordinate sphere with respect to `ν = √f ∂_r`.
    pub fn mean_curvature(&self, r: f64) -> Result<f64, GeometryError> {
        let p = self.raw(r)?;
        if !(p.rho.value > 0.0) {
            return Err(GeometryError::Invalid(format!("mean curvature undefined at r = {r}")));
        }
        Ok(p.mean_curvature())
    }

    pub fn constraints(&self, r: f64) -> Result<ConstraintSample, GeometryError> {
        let scalar_curvature = self.scalar_curvature(r)?;
        let p = self.raw(r)?;
        let tr = p.tr_k();
        let mu = 0.5 * (scalar_curvature + tr * tr - p.k_norm_sq());
        let j_radial = self.with_center_limit(r, 1, PointData::radial_current)?;
        Ok(ConstraintSample { radius: r, scalar_curvature, mu, j_radial, dec_margin: mu - j_radial.abs() })
    }

    pub fn momentum_tensor(&self, r: f64) -> Result<MomentumTensorSample, GeometryError> {
        let p = self.raw(r)?;
        let (a, b) = (p.a.value, p.b.value);
        Ok(MomentumTensorSample { radius: r, pi_nn: -2.0 * b, pi_tan: -a - b, tr_k: a + 2.0 * b, tr_sigma_k: 2.0 * b })
    }

    pub fn null_expansions(&self, r: f64) -> Result<NullExpansions, GeometryError> {
        let h = self.mean_curvature(r)?;
        let tr_sigma = 2.0 * self.raw(r)?.b.value;
        let theta_plus = h + tr_sigma;
        let theta_minus = h - tr_sigma;
        let tol = 1e-12 * h.abs().max(tr_sigma.abs()).max(1.0);
        Ok(NullExpansions {
            radius: r,
            theta_plus,
            theta_minus,
            weakly_outer_trapped: theta_plus <= tol,
            weakly_inner_trapped: theta_minus <= tol,
            marginally_outer_trapped: theta_plus.abs() <= tol,
        })
    }

    /// Uniformly samples `μ − |J|` including both endpoints.
    pub fn dec_check(&self, samples: usize) -> Result<DecReport, GeometryError> {
        if samples < 2 {
            return Err(GeometryError::Invalid("dec_check needs at least two samples".into()));
        }
        let mut min_margin = f64::INFINITY;
        let mut radius = self.domain.lo;
        for k in 0..samples {
            let r = self.domain.lo + self.domain.width() * k as f64 / (samples - 1) as f64;
            let c = self.constraints(r)?;
            if c.dec_margin < min_margin {
                min_margin = c.dec_margin;
                radius = r;
            }
        }
        Ok(DecReport { min_margin, radius, samples, tolerance: DEC_TOLERANCE, holds: min_margin >= -DEC_TOLERANCE })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn laurent(terms: &[(i32, f64)], d: Interval) -> ScalarProfile {
        ScalarProfile::laurent(terms.to_vec(), d)
    }

    #[test]
    fn flat_is_flat() {
        let d = dom(0.0, 10.0);
        let p = RadialPatch::time_symmetric(ScalarProfile::constant(1.0, d), d).unwrap();
        assert_eq!(p.scalar_curvature(3.0).unwrap(), 0.0);
        assert!((p.mean_curvature(2.0).unwrap() - 1.0).abs() < 1e-15);
        let n = p.null_expansions(1.0).unwrap();
        assert_eq!((n.theta_plus, n.theta_minus), (2.0, 2.0));
        assert!(!n.weakly_outer_trapped && !n.weakly_inner_trapped);
    }

    #[test]
    fn schwarzschild_is_scalar_flat() {
        let d = dom(3.0, 100.0);
        let p = RadialPatch::time_symmetric(laurent(&[(0, 1.0), (-1, -2.0)], d), d).unwrap();
        for r in [3.0, 4.5, 20.0, 99.0] {
            assert!(p.scalar_curvature(r).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn hyperbolic_umbilic_data_is_vacuum() {
        let d = dom(0.0, 1.0);
        for s in [1.0, -1.0] {
            let k = ScalarProfile::constant(s, d);
            let p = RadialPatch::new(laurent(&[(0, 1.0), (2, 1.0)], d), k.clone(), k, d).unwrap();
            for r in [0.0, 1e-5, 0.3, 1.0] {
                let c = p.constraints(r).unwrap();
                assert!((c.scalar_curvature + 6.0).abs() < 1e-10, "R at {r}: {}", c.scalar_curvature);
                assert!(c.mu.abs() < 1e-10 && c.j_radial.abs() < 1e-10);
            }
            assert!((p.mean_curvature(1.0).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-14);
            let m = p.momentum_tensor(0.5).unwrap();
            assert_eq!((m.pi_nn, m.pi_tan), (-2.0 * s, -2.0 * s));
        }
    }

    #[test]
    fn momentum_tensor_algebra() {
        let d = dom(1.0, 2.0);
        let p = RadialPatch::new(
            ScalarProfile::constant(1.0, d),
            ScalarProfile::constant(3.0, d),
            ScalarProfile::constant(0.0, d),
            d,
        )
        .unwrap();
        let m = p.momentum_tensor(1.5).unwrap();
        assert_eq!((m.tr_k, m.pi_nn, m.pi_tan), (3.0, 0.0, -3.0));
        assert_eq!(m.pi_nn + m.tr_sigma_k, 0.0);
    }

    #[test]
    fn outer_trapped_sphere() {
        let d = dom(0.5, 2.0);
        let p = RadialPatch::new(
            ScalarProfile::constant(1.0, d),
            ScalarProfile::constant(0.0, d),
            ScalarProfile::constant(-2.0, d),
            d,
        )
        .unwrap();
        let n = p.null_expansions(1.0).unwrap();
        assert_eq!(n.theta_plus, -2.0);
        assert!(n.weakly_outer_trapped);
    }

    #[test]
    fn rejects_conical_center_and_negative_metric() {
        let d = dom(0.0, 1.0);
        assert!(matches!(
            RadialPatch::time_symmetric(ScalarProfile::constant(2.0, d), d),
            Err(GeometryError::IrregularCenter(_))
        ));
        let d = dom(1.0, 3.0);
        assert!(matches!(
            RadialPatch::time_symmetric(laurent(&[(0, 1.0), (-1, -2.0)], d), d),
            Err(GeometryError::NonPositiveMetric { .. })
        ));
    }

    #[test]
    fn domain_errors() {
        let d = dom(1.0, 2.0);
        let p = RadialPatch::time_symmetric(ScalarProfile::constant(1.0, d), d).unwrap();
        assert!(matches!(p.constraints(3.0), Err(GeometryError::OutOfDomain { .. })));
    }
}
