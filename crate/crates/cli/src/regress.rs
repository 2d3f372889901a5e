//! Golden regression suite: each criterion measures named quantities that
//! are graded against a golden file.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use cornermass::corner::{GluedDataSet, Scenario, Side};
use cornermass::extension::{conformal_deform, conformal_deform_with_source, fillin_certificate, shi_tam_extend, FillInVerdict};
use cornermass::harmonic::{
    boundary_formula_check, hessian_at, solve_and_bound, solve_spacetime_harmonic, spacetime_hessian, AxisymField, GridStudy,
    HarmonicSettings, MassBoundReport, NodeSide, ADM_RADII,
};
use cornermass::masses::{
    adm_energy_momentum, comparison_check, hawking_mass, minimal_sphere, quasilocal, quasilocal_from_boundary, BoundaryData,
    Verdict,
};
use cornermass::numgrid::{gauss_legendre, AxisymGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{Command, Outcome, RunOptions};
use crate::config::{ConfigError, RunConfig};
use crate::envelope::ReportEnvelope;
use crate::golden::{parse_goldens, Expectation, GoldenCriterion, Measured};
use crate::CliError;

/// Named measurements of one criterion.
pub type Measurements = Vec<(&'static str, Measured)>;

/// One acceptance criterion of the suite.
pub struct Criterion {
    pub name: &'static str,
    pub measure: fn() -> Result<Measurements, CliError>,
}

/// All criteria in golden-file order.
pub const CRITERIA: [Criterion; 10] = [
    Criterion { name: "c01_counterexample", measure: counterexample },
    Criterion { name: "c02_schwarzschild", measure: schwarzschild },
    Criterion { name: "c03_shi_tam", measure: shi_tam },
    Criterion { name: "c04_mass_bound", measure: mass_bound },
    Criterion { name: "c05_boundary_identity", measure: boundary_identity },
    Criterion { name: "c06_hessian", measure: hessian },
    Criterion { name: "c07_liu_yau", measure: liu_yau },
    Criterion { name: "c08_comparison", measure: comparison },
    Criterion { name: "c09_certificates", measure: certificates },
    Criterion { name: "c10_conformal", measure: conformal },
];

fn number(v: f64) -> Measured {
    Measured::Number(v)
}

fn flag(b: bool) -> Measured {
    Measured::Flag(b)
}

fn seconds(start: Instant) -> Measured {
    number(start.elapsed().as_secs_f64())
}

fn counterexample() -> Result<Measurements, CliError> {
    let start = Instant::now();
    let data = Scenario::HyperbolicNegschw { sign: 1.0 }.build()?;
    let adm = adm_energy_momentum(&data, &ADM_RADII)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for patch in data.patches() {
        let dom = patch.domain();
        for k in 0..=400 {
            let c = patch.constraints(dom.lo + dom.width() * k as f64 / 400.0)?;
            lo = lo.min(c.dec_margin);
            hi = hi.max(c.dec_margin);
        }
    }
    let (_, report) = solve_and_bound(&data, &HarmonicSettings::default().with_resolution(32))?;
    Ok(vec![
        ("adm_energy", number(adm.energy)),
        ("momentum_norm", number(adm.momentum_norm)),
        ("corner_jump", number(data.interfaces()[0].jump)),
        ("dec_margin_min", number(lo)),
        ("dec_margin_max", number(hi)),
        ("corner_hypothesis_violated", flag(report.corner_hypothesis_violated)),
        ("lhs_negative", flag(report.lhs < 0.0)),
        ("runtime_s", seconds(start)),
    ])
}

fn schwarzschild() -> Result<Measurements, CliError> {
    let start = Instant::now();
    let data = Scenario::Schwarzschild { m: 1.0, r_in: 2.5 }.build()?;
    let adm = adm_energy_momentum(&data, &ADM_RADII)?;
    let by = quasilocal(&data, 4.0, None)?.m_by;
    Ok(vec![
        ("adm_energy_flux", number(adm.energy)),
        ("adm_energy_misner_sharp", number(adm.misner_sharp_energy)),
        ("hawking_r3", number(hawking_mass(&data, 3.0, None)?)),
        ("hawking_r5", number(hawking_mass(&data, 5.0, None)?)),
        ("hawking_r10", number(hawking_mass(&data, 10.0, None)?)),
        ("brown_york_r4", number(by)),
        ("runtime_s", seconds(start)),
    ])
}

fn shi_tam() -> Result<Measurements, CliError> {
    let (mut f_err, mut r_max, mut w_err, mut lim_err, mut e_err, mut slowest) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut monotone = true;
    for (r0, h) in [(1.0, 1.5), (2.0, 0.6), (0.5, 6.0)] {
        let start = Instant::now();
        let ext = shi_tam_extend(r0, h)?;
        slowest = slowest.max(start.elapsed().as_secs_f64());
        let f0: f64 = (h * r0 / 2.0).powi(2);
        for n in &ext.nodes {
            f_err = f_err.max((n.f - (1.0 - (1.0 - f0) * r0 / n.r)).abs());
        }
        let patch = ext.patch()?;
        for s in &ext.samples {
            r_max = r_max.max(patch.scalar_curvature(s.r)?.abs());
        }
        monotone &= ext.q_monotone(1e-12);
        let w = quasilocal_from_boundary(BoundaryData { r0, h, tr_sigma_k: 0.0, tangential: 0.0 })?.w;
        w_err = w_err.max((ext.q_at_r0() - w).abs());
        lim_err = lim_err.max((ext.q_limit - ext.e_ext).abs());
        e_err = e_err.max((ext.e_ext - 0.5 * r0 * (1.0 - f0)).abs());
    }
    Ok(vec![
        ("f_max_error", number(f_err)),
        ("scalar_curvature_max", number(r_max)),
        ("q_nonincreasing", flag(monotone)),
        ("q_r0_minus_w", number(w_err)),
        ("q_limit_minus_e_ext", number(lim_err)),
        ("e_ext_minus_closed_form", number(e_err)),
        ("runtime_s", number(slowest)),
    ])
}

fn mass_bound() -> Result<Measurements, CliError> {
    let start = Instant::now();
    let flat = Scenario::Flat.build()?;
    let (_, flat_report) = solve_and_bound(&flat, &HarmonicSettings::default().with_resolution(32))?;
    let data = Scenario::Schwarzschild { m: 1.0, r_in: 3.0 }.build()?;
    let resolutions = [32, 64, 128];
    let reports: Vec<MassBoundReport> = resolutions
        .par_iter()
        .map(|&n| solve_and_bound(&data, &HarmonicSettings::default().with_resolution(n)).map(|(_, r)| r))
        .collect::<Result<_, _>>()?;
    let study = GridStudy::from_reports(&resolutions, reports)?;
    let finest = study.reports.last().expect("three reports");
    let eps = study.epsilon_grid;
    Ok(vec![
        ("flat_slack", number(flat_report.slack)),
        ("slack_plus_epsilon", number(finest.slack + eps)),
        ("observed_order", number(study.observed_order.unwrap_or(f64::NAN))),
        ("epsilon_decreasing", flag(study.differences[1] < study.differences[0])),
        ("delta_levels", number(finest.delta_levels.len() as f64)),
        ("delta_variation_minus_epsilon", number(finest.delta_variation - eps)),
        ("runtime_s", seconds(start)),
    ])
}

fn uniform_grid(r_out: f64, n: usize) -> Result<AxisymGrid, CliError> {
    AxisymGrid::new((0..=n).map(|k| r_out * k as f64 / n as f64).collect(), n).map_err(|e| CliError::Numerical(e.to_string()))
}

fn random_field(seed: u64) -> impl Fn(f64, f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.1..0.1)).collect();
    move |r: f64, t: f64| {
        let x = t.cos();
        r * x + c[0] + c[1] * r * r * (1.5 * x * x - 0.5) + c[2] * (1.3 * r).sin() * x + c[3] * r.powi(3) * x.powi(3)
            + c[4] * (0.7 * r).cos()
            + c[5] * r * r * x
    }
}

fn boundary_identity() -> Result<Measurements, CliError> {
    let flat = Scenario::Flat.build()?;
    let f = AxisymField::sample(&flat, uniform_grid(2.0, 64)?, 1e-8, |r, t| r * t.cos())?;
    let rep = boundary_formula_check(&f, 1.0, Side::Inner)?;
    let mut min_order = f64::INFINITY;
    for seed in 0..4 {
        let u = random_field(seed);
        let residual = |n: usize| -> Result<f64, CliError> {
            let f = AxisymField::sample(&flat, uniform_grid(2.0, n)?, 1e-8, &u)?;
            Ok(boundary_formula_check(&f, 1.0, Side::Inner)?.discrepancy.abs())
        };
        min_order = min_order.min((residual(64)? / residual(128)?).log2());
    }
    Ok(vec![("flat_discrepancy", number(rep.lhs - rep.rhs)), ("injected_min_order", number(min_order))])
}

/// Frame components `[rr, rθ, θθ, φφ]` of the Cartesian Hessian of
/// `z³ + ½(x² + y²)z` at `(r, θ)` in the `y = 0` half-plane.
fn polynomial_hessian(r: f64, t: f64) -> [f64; 4] {
    let (x, z) = (r * t.sin(), r * t.cos());
    let h = [[z, 0.0, x], [0.0, z, 0.0], [x, 0.0, 6.0 * z]];
    let e1 = [t.sin(), 0.0, t.cos()];
    let e2 = [t.cos(), 0.0, -t.sin()];
    let e3 = [0.0, 1.0, 0.0];
    let q = |a: &[f64; 3], b: &[f64; 3]| (0..3).map(|i| (0..3).map(|j| a[i] * h[i][j] * b[j]).sum::<f64>()).sum::<f64>();
    [q(&e1, &e1), q(&e1, &e2), q(&e2, &e2), q(&e3, &e3)]
}

fn hessian() -> Result<Measurements, CliError> {
    let data = Scenario::HyperbolicNegschw { sign: 1.0 }.build()?;
    let sol = solve_spacetime_harmonic(&data, &HarmonicSettings::default().with_resolution(16))?;
    let residual = spacetime_hessian(&sol.field).identity_residual(&sol.field);
    let flat = Scenario::Flat.build()?;
    let error = |n: usize| -> Result<f64, CliError> {
        let u = |r: f64, t: f64| r.powi(3) * (t.cos().powi(3) + 0.5 * t.sin().powi(2) * t.cos());
        let f = AxisymField::sample(&flat, uniform_grid(2.0, n)?, 0.0, u)?;
        let g = f.grid();
        let i = g.node_at(1.0).ok_or_else(|| CliError::Numerical("no node at r = 1".into()))?;
        let mut worst: f64 = 0.0;
        for j in 0..g.n_theta() {
            let s = hessian_at(&f, i, j, NodeSide::Upper).ok_or_else(|| CliError::Numerical("missing Hessian sample".into()))?;
            let exact = polynomial_hessian(1.0, g.theta(j));
            for c in 0..4 {
                worst = worst.max((s.hessian[c] - exact[c]).abs());
            }
        }
        Ok(worst)
    };
    let order = (error(32)? / error(64)?).log2();
    Ok(vec![("identity_residual", number(residual)), ("fd_order", number(order))])
}

fn liu_yau() -> Result<Measurements, CliError> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = f64::INFINITY;
    let trials = 10_000;
    for _ in 0..trials {
        let r0 = rng.gen_range(0.1..10.0);
        let tr: f64 = rng.gen_range(-5.0..5.0);
        let h = tr.abs() + rng.gen_range(1e-6..5.0);
        let tangential = rng.gen_range(0.0..5.0);
        let q = quasilocal_from_boundary(BoundaryData { r0, h, tr_sigma_k: tr, tangential })?;
        let m_ly = q.m_ly.ok_or_else(|| CliError::Numerical("Liu-Yau mass undefined with H > |tr k|".into()))?;
        worst = worst.min(q.w - m_ly);
    }
    Ok(vec![("min_margin", number(worst)), ("trials", number(f64::from(trials))), ("runtime_s", seconds(start))])
}

fn comparison() -> Result<Measurements, CliError> {
    let set = Scenario::Schwarzschild { m: 1.0, r_in: 2.5 }.build()?;
    let q = quasilocal(&set, 10.0, None)?;
    let hulls: Vec<f64> = (0..50).map(|k| 2.5 + 7.5 * k as f64 / 49.0).collect();
    let c = comparison_check(&q, &set, &hulls)?;
    let hull_min = c.hulls.iter().map(|h| h.margin).fold(f64::INFINITY, f64::min);
    let iso = Scenario::IsotropicSchwarzschild { m: 1.0, s_in: 0.25 }.build()?;
    let sphere = minimal_sphere(&iso)?.ok_or_else(|| CliError::Numerical("no minimal sphere".into()))?;
    let (mut far_min, mut penrose_pass) = (f64::INFINITY, true);
    for s0 in [10.0, 100.0, 1000.0] {
        let q = quasilocal(&iso, s0, None)?;
        let p = comparison_check(&q, &iso, &[])?.penrose;
        penrose_pass &= p.is_some_and(|p| p.verdict == Verdict::Pass);
        far_min = far_min.min(q.w - 1.0);
    }
    Ok(vec![
        ("hull_count", number(c.hulls.len() as f64)),
        ("hull_min_margin", number(hull_min)),
        ("hull_all_pass", flag(c.all_pass())),
        ("minimal_sphere_radius", number(sphere.radius)),
        ("minimal_sphere_area", number(sphere.area)),
        ("far_w_minus_one", number(far_min)),
        ("penrose_all_pass", flag(penrose_pass)),
    ])
}

fn certificates() -> Result<Measurements, CliError> {
    let (r0, tr, beta) = (1.0, 0.0, 0.0);
    let mut exact = true;
    for k in 1..=80 {
        let gap = 4.0 * f64::from(k) / 80.0;
        let v = fillin_certificate(r0, gap, tr, beta)?;
        exact &= (v.verdict == FillInVerdict::NoDecFillIn) == (gap > 2.0);
    }
    Ok(vec![
        ("no_fill_in_exactly_above_2", flag(exact)),
        ("e_ext_at_3", number(fillin_certificate(r0, 3.0, tr, beta)?.e_ext)),
        ("e_ext_at_2", number(fillin_certificate(r0, 2.0, tr, beta)?.e_ext)),
    ])
}

fn bump(eps: f64) -> impl Fn(f64) -> f64 + Send + Sync + Clone {
    move |r: f64| {
        let x = (r - 2.0) / 0.5;
        if x.abs() < 1.0 {
            eps * (1.0 - x * x).powi(3)
        } else {
            0.0
        }
    }
}

/// `(1/32π)∫ b dV` for a bump supported on `[1.5, 2.5]`.
fn green_oracle(b: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_legendre(40);
    let integral: f64 = x.iter().zip(&w).map(|(x, w)| 0.5 * w * b(2.0 + 0.5 * x) * 4.0 * PI * (2.0 + 0.5 * x).powi(2)).sum();
    integral / (32.0 * PI)
}

fn conformal() -> Result<Measurements, CliError> {
    let flat: GluedDataSet = Scenario::Flat.build()?;
    let zero = conformal_deform(&flat, (0.9, 1.1), 1.0)?;
    let identity = zero.u_min == 1.0 && zero.u_max == 1.0 && zero.samples.iter().all(|(_, u)| *u == 1.0);
    let eps = 1e-3;
    let d1 = conformal_deform_with_source(&flat, Arc::new(bump(eps)), 0.5, 2.5)?;
    let d2 = conformal_deform_with_source(&flat, Arc::new(bump(2.0 * eps)), 0.5, 2.5)?;
    Ok(vec![
        ("zero_source_u_identically_one", flag(identity)),
        ("zero_source_a", number(zero.a)),
        ("linearity_error", number((d1.a / green_oracle(bump(eps)) - 1.0).abs())),
        ("doubling_error", number((d2.a / (2.0 * d1.a) - 1.0).abs())),
        ("m_hat_recomputation", number(d1.m_hat - d1.m_hat_recomputed())),
    ])
}

/// Grade of one golden line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryResult {
    pub key: String,
    pub expectation: Expectation,
    /// Absent when not measured or not finite, and for timings under `--deterministic`.
    pub measured: Option<Measured>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub name: String,
    pub passed: bool,
    pub entries: Vec<EntryResult>,
}

fn grade(golden: &GoldenCriterion, measured: &Measurements) -> (CriterionResult, Vec<Option<Measured>>) {
    let mut values = Vec::new();
    let entries: Vec<EntryResult> = golden
        .entries
        .iter()
        .map(|e| {
            let m = measured
                .iter()
                .find(|(k, _)| *k == e.key)
                .map(|(_, v)| *v)
                .filter(|v| !matches!(v, Measured::Number(x) if !x.is_finite()));
            values.push(m);
            EntryResult { key: e.key.clone(), expectation: e.expectation, measured: m, passed: m.is_some_and(|m| e.expectation.accepts(m)) }
        })
        .collect();
    (CriterionResult { name: golden.name.clone(), passed: entries.iter().all(|e| e.passed), entries }, values)
}

fn show(m: Option<Measured>) -> String {
    m.map_or_else(|| "<not measured>".into(), |m| m.to_string())
}

/// Grades the golden file named in `[regress] goldens`, optionally
/// restricted to criteria whose name contains `options.filter`.
pub fn run_suite(config: &RunConfig, options: &RunOptions) -> Result<Outcome, CliError> {
    let rel = config.regress.goldens.as_deref().ok_or_else(|| ConfigError::Invalid {
        field: "regress.goldens".into(),
        message: "regress needs a golden file".into(),
    })?;
    let path = config.resolve(rel);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| ConfigError::Read { path: path.display().to_string(), message: e.to_string() })?;
    let goldens = parse_goldens(&text)?;
    let selected: Vec<&GoldenCriterion> =
        goldens.iter().filter(|g| options.filter.as_deref().is_none_or(|f| g.name.contains(f))).collect();
    if selected.is_empty() {
        return Err(ConfigError::Invalid {
            field: "filter".into(),
            message: format!("no criterion matches '{}'", options.filter.as_deref().unwrap_or("")),
        }
        .into());
    }
    let mut env = ReportEnvelope::new(Command::Regress.name(), config);
    let mut table = String::new();
    let mut diff = String::new();
    let mut results = Vec::new();
    for golden in selected {
        let criterion = CRITERIA.iter().find(|c| c.name == golden.name).ok_or_else(|| ConfigError::Invalid {
            field: golden.name.clone(),
            message: format!("unknown criterion in {}", path.display()),
        })?;
        let measured = (criterion.measure)()?;
        let (mut result, values) = grade(golden, &measured);
        table.push_str(&format!("{} {}\n", if result.passed { "PASS" } else { "FAIL" }, result.name));
        let mut hunk = String::new();
        for ((entry, golden_entry), value) in result.entries.iter().zip(&golden.entries).zip(&values) {
            table.push_str(&format!(
                "  {} {:<32} {:>24}  expected {}\n",
                if entry.passed { "PASS" } else { "FAIL" },
                entry.key,
                show(*value),
                golden_entry.text
            ));
            if !entry.passed {
                hunk.push_str(&format!("-{} = {}\n+{} = {}\n", entry.key, golden_entry.text, entry.key, show(*value)));
            }
        }
        if !hunk.is_empty() {
            diff.push_str(&format!("@@ [{}] @@\n{hunk}", result.name));
        }
        env.add_check(&result.name, result.passed, format!("{} entries", result.entries.len()));
        if options.deterministic {
            for e in result.entries.iter_mut().filter(|e| e.key.starts_with("runtime")) {
                e.measured = None;
            }
        }
        results.push(result);
    }
    let passed = results.iter().filter(|r| r.passed).count();
    table.push_str(&format!("{passed}/{} criteria pass\n", results.len()));
    if !diff.is_empty() {
        table.push_str(&format!("--- golden\n+++ measured\n{diff}"));
    }
    env.add_report("regress", &results)?;
    Ok(Outcome { envelope: env, csv: None, table: Some(table) })
}
