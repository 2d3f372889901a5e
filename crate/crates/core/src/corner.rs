//! Radial patches glued along coordinate spheres, corner jump data and the
//! scenario registry.
//!
//! Patches share the areal-radius chart, so induced metrics on a corner
//! sphere agree automatically; `f` and `k` may jump. At each corner the
//! unit normal points toward increasing `r` (into the asymptotic end).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, RadialPatch};
use crate::numgrid::{Interval, Jet, ScalarProfile};

/// Failures of gluing and scenario construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CornerError {
    #[error("patch domains do not meet at r = {r_c}: inner ends at {inner_hi}, outer starts at {outer_lo}")]
    DomainMismatch { r_c: f64, inner_hi: f64, outer_lo: f64 },
    #[error("areal radii differ across r = {r_c}: {minus} vs {plus}")]
    ArealMismatch { r_c: f64, minus: f64, plus: f64 },
    #[error("f jumps across r = {r_c} ({minus} vs {plus}) without allow_discontinuous")]
    DiscontinuousMetric { r_c: f64, minus: f64, plus: f64 },
    #[error("radius {r} is a corner; choose a side")]
    AmbiguousCorner { r: f64 },
    #[error("radius {r} outside data set [{lo}, {hi}]")]
    OutOfRange { r: f64, lo: f64, hi: f64 },
    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),
    #[error("invalid scenario parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Which side of a corner sphere to evaluate on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Inner,
    Outer,
}

/// Boundary one-form `ω = π(·, ν)` split into its normal component and the
/// length of its tangential part.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OmegaData {
    pub normal: f64,
    pub tangential: f64,
}

impl OmegaData {
    pub fn norm(&self) -> f64 {
        self.normal.hypot(self.tangential)
    }
}

/// Both-sided data on one corner sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerInterface {
    pub r_c: f64,
    pub areal_radius: f64,
    pub areal_mismatch: f64,
    pub f_minus: f64,
    pub f_plus: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    pub omega_minus: OmegaData,
    pub omega_plus: OmegaData,
    pub jump: f64,
}

impl CornerInterface {
    /// `|ω₋ − ω₊|` on the shared round boundary metric. Tangential parts are
    /// treated as aligned, which is the only configuration the symmetric
    /// data produce.
    pub fn omega_difference(&self) -> f64 {
        (self.omega_minus.normal - self.omega_plus.normal).hypot(self.omega_minus.tangential - self.omega_plus.tangential)
    }

    /// Interface with inner and outer roles exchanged.
    pub fn swapped(&self) -> Self {
        let mut s = Self {
            f_minus: self.f_plus,
            f_plus: self.f_minus,
            h_minus: self.h_plus,
            h_plus: self.h_minus,
            omega_minus: self.omega_plus,
            omega_plus: self.omega_minus,
            ..*self
        };
        s.jump = jump_condition(&s);
        s
    }

    pub fn satisfies_jump_condition(&self, tol: f64) -> bool {
        self.jump >= -tol
    }
}

/// `(H₋ − H₊) − |ω₋ − ω₊|`.
pub fn jump_condition(interface: &CornerInterface) -> f64 {
    (interface.h_minus - interface.h_plus) - interface.omega_difference()
}

/// Gluing switches.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GlueOptions {
    /// Permit `f` to jump across the corner.
    pub allow_discontinuous: bool,
    /// Tangential `|ω|` on the inner and outer sides.
    pub tangential: (f64, f64),
}

/// Analytic values attached by the scenario registry.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Expectations {
    pub adm_energy: Option<f64>,
    pub adm_momentum_norm: Option<f64>,
    pub corner_jumps: Vec<f64>,
    pub vacuum: bool,
    pub minimal_sphere: Option<f64>,
}

/// Ordered patches joined at corner spheres plus asymptotic metadata.
#[derive(Debug, Clone)]
pub struct GluedDataSet {
    pub name: String,
    patches: Vec<RadialPatch>,
    interfaces: Vec<CornerInterface>,
    decay_order: Option<f64>,
    pub topology_asserted: bool,
    pub expectations: Expectations,
}

const MATCH_TOL: f64 = 1e-12;

fn interface_between(inner: &RadialPatch, outer: &RadialPatch, r_c: f64, opts: GlueOptions) -> Result<CornerInterface, CornerError> {
    let (di, d_o) = (inner.domain(), outer.domain());
    let tol = MATCH_TOL * r_c.abs().max(1.0);
    if (di.hi - r_c).abs() > tol || (d_o.lo - r_c).abs() > tol {
        return Err(CornerError::DomainMismatch { r_c, inner_hi: di.hi, outer_lo: d_o.lo });
    }
    let pm = inner.point(di.hi)?;
    let pp = outer.point(d_o.lo)?;
    for v in [pm.f.value, pp.f.value] {
        if !(v > 0.0) {
            return Err(GeometryError::NonPositiveMetric { r: r_c, value: v }.into());
        }
    }
    let mismatch = (pm.rho.value - pp.rho.value).abs();
    if mismatch > tol * pm.rho.value.abs().max(1.0) {
        return Err(CornerError::ArealMismatch { r_c, minus: pm.rho.value, plus: pp.rho.value });
    }
    if !opts.allow_discontinuous && (pm.f.value - pp.f.value).abs() > tol * pm.f.value.max(1.0) {
        return Err(CornerError::DiscontinuousMetric { r_c, minus: pm.f.value, plus: pp.f.value });
    }
    let mm = inner.momentum_tensor(di.hi)?;
    let mp = outer.momentum_tensor(d_o.lo)?;
    let mut iface = CornerInterface {
        r_c,
        areal_radius: pm.rho.value,
        areal_mismatch: mismatch,
        f_minus: pm.f.value,
        f_plus: pp.f.value,
        h_minus: inner.mean_curvature(di.hi)?,
        h_plus: outer.mean_curvature(d_o.lo)?,
        omega_minus: OmegaData { normal: mm.pi_nn, tangential: opts.tangential.0 },
        omega_plus: OmegaData { normal: mp.pi_nn, tangential: opts.tangential.1 },
        jump: 0.0,
    };
    iface.jump = jump_condition(&iface);
    Ok(iface)
}

/// Decay exponent of `|1 − f| + |(ρ/r)² − 1|` from the three largest
/// sample radii `r_max, r_max/2, r_max/4`. `None` when the deviation vanishes.
pub fn sampled_decay_order(patch: &RadialPatch) -> Result<Option<f64>, CornerError> {
    let hi = patch.domain().hi;
    let dev = |r: f64| -> Result<f64, CornerError> {
        let p = patch.point(r)?;
        Ok((1.0 - p.f.value).abs() + ((p.rho.value / r).powi(2) - 1.0).abs())
    };
    let d: Vec<f64> = [hi / 4.0, hi / 2.0, hi].iter().map(|&r| dev(r)).collect::<Result<_, _>>()?;
    if d.iter().all(|&v| v <= 1e-15) {
        return Ok(None);
    }
    let q1 = (d[0] / d[1]).ln() / 2f64.ln();
    let q2 = (d[1] / d[2]).ln() / 2f64.ln();
    Ok(Some(q1.min(q2)))
}

impl GluedDataSet {
    /// Data set made of one smooth patch.
    pub fn single(name: &str, patch: RadialPatch) -> Result<Self, CornerError> {
        Self::from_patches(name, vec![patch], &[])
    }

    /// Glues consecutive patches; `options[i]` applies to the corner between
    /// patches `i` and `i + 1` (missing entries use the defaults).
    pub fn from_patches(name: &str, patches: Vec<RadialPatch>, options: &[GlueOptions]) -> Result<Self, CornerError> {
        if patches.is_empty() {
            return Err(CornerError::InvalidParams("no patches".into()));
        }
        let mut interfaces = Vec::new();
        for (k, w) in patches.windows(2).enumerate() {
            let r_c = w[0].domain().hi;
            interfaces.push(interface_between(&w[0], &w[1], r_c, options.get(k).copied().unwrap_or_default())?);
        }
        let decay_order = sampled_decay_order(patches.last().expect("non-empty"))?;
        Ok(Self {
            name: name.to_string(),
            patches,
            interfaces,
            decay_order,
            topology_asserted: true,
            expectations: Expectations::default(),
        })
    }

    pub fn patches(&self) -> &[RadialPatch] {
        &self.patches
    }

    pub fn interfaces(&self) -> &[CornerInterface] {
        &self.interfaces
    }

    pub fn outermost(&self) -> &RadialPatch {
        self.patches.last().expect("non-empty")
    }

    pub fn innermost(&self) -> &RadialPatch {
        &self.patches[0]
    }

    pub fn r_min(&self) -> f64 {
        self.patches[0].domain().lo
    }

    pub fn r_max(&self) -> f64 {
        self.outermost().domain().hi
    }

    pub fn has_center(&self) -> bool {
        self.patches[0].has_center()
    }

    /// Recorded decay order `q`; `None` means exactly flat at the sampled radii.
    pub fn decay_order(&self) -> Option<f64> {
        self.decay_order
    }

    /// Whether `f → 1` with `q > ½`.
    pub fn asymptotically_flat(&self) -> bool {
        self.decay_order.is_none_or(|q| q > 0.5)
    }

    pub fn corner_radii(&self) -> Vec<f64> {
        self.interfaces.iter().map(|i| i.r_c).collect()
    }

    /// Index of the corner at `r`, if any.
    pub fn corner_at(&self, r: f64) -> Option<usize> {
        self.interfaces.iter().position(|i| (i.r_c - r).abs() <= MATCH_TOL * r.abs().max(1.0))
    }

    /// Patch index containing `r`; a corner radius needs a side.
    pub fn patch_index(&self, r: f64, side: Option<Side>) -> Result<usize, CornerError> {
        if let Some(c) = self.corner_at(r) {
            return match side {
                Some(Side::Inner) => Ok(c),
                Some(Side::Outer) => Ok(c + 1),
                None => Err(CornerError::AmbiguousCorner { r }),
            };
        }
        self.patches
            .iter()
            .position(|p| p.domain().contains(r))
            .ok_or(CornerError::OutOfRange { r, lo: self.r_min(), hi: self.r_max() })
    }

    pub fn patch_for(&self, r: f64, side: Option<Side>) -> Result<&RadialPatch, CornerError> {
        Ok(&self.patches[self.patch_index(r, side)?])
    }

    /// Copy with the outermost patch cut (or extended, for analytic
    /// profiles) to end at `r_out`.
    pub fn truncated(&self, r_out: f64) -> Result<Self, CornerError> {
        let mut out = self.clone();
        let last = out.patches.len() - 1;
        let lo = out.patches[last].domain().lo;
        let dom = Interval::new(lo, r_out).map_err(GeometryError::from)?;
        out.patches[last] = out.patches[last].restricted(dom)?;
        Ok(out)
    }
}

/// Glues `inner` and `outer` at `r_c` with default options.
pub fn glue(inner: RadialPatch, outer: RadialPatch, r_c: f64) -> Result<GluedDataSet, CornerError> {
    glue_with(inner, outer, r_c, GlueOptions::default())
}

/// Glues `inner` and `outer` at `r_c`.
pub fn glue_with(inner: RadialPatch, outer: RadialPatch, r_c: f64, options: GlueOptions) -> Result<GluedDataSet, CornerError> {
    let iface = interface_between(&inner, &outer, r_c, options)?;
    let mut set = GluedDataSet::from_patches("glued", vec![inner, outer], &[options])?;
    set.interfaces[0] = iface;
    Ok(set)
}

/// Outer radius of every registry scenario.
pub const SCENARIO_OUTER_RADIUS: f64 = 1e4;

/// One patch of a custom scenario given by Laurent coefficients
/// `(power, coefficient)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomPatch {
    pub lo: f64,
    pub hi: f64,
    pub f: Vec<(i32, f64)>,
    #[serde(default)]
    pub a: Vec<(i32, f64)>,
    #[serde(default)]
    pub b: Vec<(i32, f64)>,
}

/// Registry entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Scenario {
    Flat,
    Schwarzschild { m: f64, r_in: f64 },
    IsotropicSchwarzschild { m: f64, s_in: f64 },
    HyperbolicNegschw { sign: f64 },
    ShiTamGlue { r0: f64, h: f64, omega: f64 },
    Custom { patches: Vec<CustomPatch>, allow_discontinuous: bool },
}

/// Registered scenario names.
pub const SCENARIO_NAMES: [&str; 6] =
    ["flat", "schwarzschild", "isotropic_schwarzschild", "hyperbolic_negschw", "shi_tam_glue", "custom"];

fn param(params: &BTreeMap<String, f64>, key: &str, default: Option<f64>) -> Result<f64, CornerError> {
    params
        .get(key)
        .copied()
        .or(default)
        .ok_or_else(|| CornerError::InvalidParams(format!("missing parameter '{key}'")))
}

impl Scenario {
    /// Looks up a named scenario with numeric parameters. `custom` needs
    /// structured patches and is built with [`Scenario::Custom`] directly.
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self, CornerError> {
        Ok(match name {
            "flat" => Scenario::Flat,
            "schwarzschild" => Scenario::Schwarzschild { m: param(params, "m", Some(1.0))?, r_in: param(params, "r_in", Some(3.0))? },
            "isotropic_schwarzschild" => {
                let m = param(params, "m", Some(1.0))?;
                Scenario::IsotropicSchwarzschild { m, s_in: param(params, "s_in", Some(m / 4.0))? }
            }
            "hyperbolic_negschw" => Scenario::HyperbolicNegschw { sign: param(params, "sign", Some(1.0))? },
            "shi_tam_glue" => Scenario::ShiTamGlue {
                r0: param(params, "r0", None)?,
                h: param(params, "h", None)?,
                omega: param(params, "omega", Some(0.0))?,
            },
            "custom" => return Err(CornerError::InvalidParams("custom scenarios need patch definitions".into())),
            other => return Err(CornerError::UnknownScenario(other.to_string())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Flat => "flat",
            Scenario::Schwarzschild { .. } => "schwarzschild",
            Scenario::IsotropicSchwarzschild { .. } => "isotropic_schwarzschild",
            Scenario::HyperbolicNegschw { .. } => "hyperbolic_negschw",
            Scenario::ShiTamGlue { .. } => "shi_tam_glue",
            Scenario::Custom { .. } => "custom",
        }
    }

    pub fn build(&self) -> Result<GluedDataSet, CornerError> {
        let dom = |lo: f64, hi: f64| Interval::new(lo, hi).map_err(|e| CornerError::Geometry(e.into()));
        let zero = |d: Interval| ScalarProfile::constant(0.0, d);
        let mut set = match *self {
            Scenario::Flat => {
                let d = dom(0.0, SCENARIO_OUTER_RADIUS)?;
                let mut s = GluedDataSet::single("flat", RadialPatch::time_symmetric(ScalarProfile::constant(1.0, d), d)?)?;
                s.expectations = Expectations { adm_energy: Some(0.0), adm_momentum_norm: Some(0.0), vacuum: true, ..Default::default() };
                s
            }
            Scenario::Schwarzschild { m, r_in } => {
                if !(r_in > 2.0 * m) || !(r_in > 0.0) {
                    return Err(CornerError::InvalidParams(format!("schwarzschild needs r_in > 2m, got r_in = {r_in}, m = {m}")));
                }
                let d = dom(r_in, SCENARIO_OUTER_RADIUS)?;
                let f = ScalarProfile::laurent(vec![(0, 1.0), (-1, -2.0 * m)], d);
                let mut s = GluedDataSet::single("schwarzschild", RadialPatch::time_symmetric(f, d)?)?;
                s.expectations = Expectations { adm_energy: Some(m), adm_momentum_norm: Some(0.0), vacuum: true, ..Default::default() };
                s
            }
            Scenario::IsotropicSchwarzschild { m, s_in } => {
                if !(m > 0.0) || !(s_in > 0.0) {
                    return Err(CornerError::InvalidParams("isotropic_schwarzschild needs m > 0 and s_in > 0".into()));
                }
                let d = dom(s_in, SCENARIO_OUTER_RADIUS)?;
                let psi = move |s: f64| (1.0 + m / (2.0 * s), -m / (2.0 * s * s), m / (s * s * s));
                let f = ScalarProfile::from_fn(d, move |s| {
                    let (p, dp, ddp) = psi(s);
                    Jet::new(p.powi(-4), -4.0 * p.powi(-5) * dp, 20.0 * p.powi(-6) * dp * dp - 4.0 * p.powi(-5) * ddp)
                });
                let rho = ScalarProfile::from_fn(d, move |s| {
                    let (p, dp, ddp) = psi(s);
                    Jet::new(s * p * p, p * p + 2.0 * s * p * dp, 4.0 * p * dp + 2.0 * s * (dp * dp + p * ddp))
                });
                let patch = RadialPatch::with_areal_radius(f, zero(d), zero(d), rho, d)?;
                let mut s = GluedDataSet::single("isotropic_schwarzschild", patch)?;
                s.expectations = Expectations {
                    adm_energy: Some(m),
                    adm_momentum_norm: Some(0.0),
                    vacuum: true,
                    minimal_sphere: (s_in < m / 2.0).then_some(m / 2.0),
                    ..Default::default()
                };
                s
            }
            Scenario::HyperbolicNegschw { sign } => {
                if sign.abs() != 1.0 {
                    return Err(CornerError::InvalidParams(format!("sign must be ±1, got {sign}")));
                }
                let di = dom(0.0, 1.0)?;
                let k = ScalarProfile::constant(sign, di);
                let inner = RadialPatch::new(ScalarProfile::laurent(vec![(0, 1.0), (2, 1.0)], di), k.clone(), k, di)?;
                let d_o = dom(1.0, SCENARIO_OUTER_RADIUS)?;
                let outer = RadialPatch::time_symmetric(ScalarProfile::laurent(vec![(0, 1.0), (-1, 1.0)], d_o), d_o)?;
                let mut s = GluedDataSet::from_patches("hyperbolic_negschw", vec![inner, outer], &[])?;
                s.expectations = Expectations {
                    adm_energy: Some(-0.5),
                    adm_momentum_norm: Some(0.0),
                    corner_jumps: vec![-2.0],
                    vacuum: true,
                    minimal_sphere: None,
                };
                s
            }
            Scenario::ShiTamGlue { r0, h, omega } => {
                let w = omega.abs();
                if !(r0 > 0.0) || !(h > w) {
                    return Err(CornerError::InvalidParams(format!("shi_tam_glue needs r0 > 0 and H > |ω|, got r0 = {r0}, H = {h}, ω = {omega}")));
                }
                let f0 = (h * r0 / 2.0).powi(2);
                let f_eff = ((h - w) * r0 / 2.0).powi(2);
                let di = dom(0.0, r0)?;
                let b = ScalarProfile::constant(-w / 2.0, di);
                let inner = RadialPatch::new(ScalarProfile::laurent(vec![(0, 1.0), (2, (f0 - 1.0) / (r0 * r0))], di), b.clone(), b, di)?;
                let d_o = dom(r0, SCENARIO_OUTER_RADIUS.max(10.0 * r0))?;
                let outer =
                    RadialPatch::time_symmetric(ScalarProfile::laurent(vec![(0, 1.0), (-1, -(1.0 - f_eff) * r0)], d_o), d_o)?;
                let opts = GlueOptions { allow_discontinuous: true, tangential: (0.0, 0.0) };
                let mut s = GluedDataSet::from_patches("shi_tam_glue", vec![inner, outer], &[opts])?;
                s.expectations = Expectations {
                    adm_energy: Some(0.5 * r0 * (1.0 - f_eff)),
                    adm_momentum_norm: Some(0.0),
                    corner_jumps: vec![0.0],
                    vacuum: false,
                    minimal_sphere: None,
                };
                s
            }
            Scenario::Custom { ref patches, allow_discontinuous } => {
                let built = patches
                    .iter()
                    .map(|p| {
                        let d = dom(p.lo, p.hi)?;
                        Ok(RadialPatch::new(
                            ScalarProfile::laurent(p.f.clone(), d),
                            ScalarProfile::laurent(p.a.clone(), d),
                            ScalarProfile::laurent(p.b.clone(), d),
                            d,
                        )?)
                    })
                    .collect::<Result<Vec<_>, CornerError>>()?;
                let opts = vec![GlueOptions { allow_discontinuous, tangential: (0.0, 0.0) }; built.len().saturating_sub(1)];
                GluedDataSet::from_patches("custom", built, &opts)?
            }
        };
        set.name = self.name().to_string();
        Ok(set)
    }
}

/// Builds a registry scenario by name.
pub fn scenario_build(name: &str, params: &BTreeMap<String, f64>) -> Result<GluedDataSet, CornerError> {
    Scenario::from_name(name, params)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schw_piece(lo: f64, hi: f64) -> RadialPatch {
        let d = Interval::new(lo, hi).unwrap();
        RadialPatch::time_symmetric(ScalarProfile::laurent(vec![(0, 1.0), (-1, -2.0)], d), d).unwrap()
    }

    #[test]
    fn self_glue_has_no_corner() {
        let set = glue(schw_piece(3.0, 5.0), schw_piece(5.0, 100.0), 5.0).unwrap();
        let i = set.interfaces()[0];
        assert_eq!(i.h_minus, i.h_plus);
        assert_eq!(i.jump, 0.0);
        assert_eq!(i.omega_minus, i.omega_plus);
    }

    #[test]
    fn flat_identity_glue() {
        let d1 = Interval::new(0.0, 1.0).unwrap();
        let d2 = Interval::new(1.0, 10.0).unwrap();
        let set = glue(
            RadialPatch::time_symmetric(ScalarProfile::constant(1.0, d1), d1).unwrap(),
            RadialPatch::time_symmetric(ScalarProfile::constant(1.0, d2), d2).unwrap(),
            1.0,
        )
        .unwrap();
        let i = set.interfaces()[0];
        assert_eq!((i.h_minus, i.h_plus, i.jump), (2.0, 2.0, 0.0));
        assert_eq!(i.omega_difference(), 0.0);
        assert_eq!(set.decay_order(), None);
    }

    #[test]
    fn counterexample_corner() {
        for sign in [1.0, -1.0] {
            let set = Scenario::HyperbolicNegschw { sign }.build().unwrap();
            let i = set.interfaces()[0];
            let h = 2.0 * 2f64.sqrt();
            assert!((i.h_minus - h).abs() < 1e-14 && (i.h_plus - h).abs() < 1e-14);
            assert!((i.jump + 2.0).abs() < 1e-12);
            assert_eq!(i.omega_minus.normal, -2.0 * sign);
            assert!(set.asymptotically_flat());
            assert!((set.decay_order().unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn shi_tam_glue_has_zero_jump() {
        let set = Scenario::ShiTamGlue { r0: 1.0, h: 2.0, omega: 1.0 }.build().unwrap();
        assert!(set.interfaces()[0].jump.abs() < 1e-14);
        assert!((set.expectations.adm_energy.unwrap() - 0.375).abs() < 1e-14);
    }

    #[test]
    fn errors() {
        assert!(matches!(glue(schw_piece(3.0, 5.0), schw_piece(6.0, 10.0), 5.0), Err(CornerError::DomainMismatch { .. })));
        let d1 = Interval::new(0.0, 1.0).unwrap();
        let d2 = Interval::new(1.0, 10.0).unwrap();
        let jumped = glue(
            RadialPatch::time_symmetric(ScalarProfile::constant(1.0, d1), d1).unwrap(),
            RadialPatch::time_symmetric(ScalarProfile::constant(2.0, d2), d2).unwrap(),
            1.0,
        );
        assert!(matches!(jumped, Err(CornerError::DiscontinuousMetric { .. })));
        let mut p = BTreeMap::new();
        p.insert("r_in".to_string(), 2.0);
        assert!(matches!(scenario_build("schwarzschild", &p), Err(CornerError::InvalidParams(_))));
        assert!(matches!(scenario_build("kerr", &p), Err(CornerError::UnknownScenario(_))));
    }

    #[test]
    fn side_selection() {
        let set = Scenario::HyperbolicNegschw { sign: 1.0 }.build().unwrap();
        assert!(matches!(set.patch_index(1.0, None), Err(CornerError::AmbiguousCorner { .. })));
        assert_eq!(set.patch_index(1.0, Some(Side::Outer)).unwrap(), 1);
        assert_eq!(set.patch_index(0.5, None).unwrap(), 0);
    }
}
