//! The five commands and their shared run loop.

use std::path::Path;
use std::time::Instant;

use cornermass::corner::{CornerInterface, Expectations, Side};
use cornermass::extension::{fillin_certificate, quasilocal_pipeline, CertificateVerdict, ExtensionError, FillInVerdict};
use cornermass::geometry::DecReport;
use cornermass::harmonic::{solve_and_bound, GridStudy, MassBoundReport};
use cornermass::masses::{boundary_data, comparison_check, quasilocal, Verdict};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, RunConfig};
use crate::envelope::{ReportEnvelope, Timing};
use crate::{regress, CliError};

/// Subcommands of `corner-mass`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Constraints,
    Massbound,
    Quasilocal,
    Certificate,
    Regress,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Constraints => "constraints",
            Command::Massbound => "massbound",
            Command::Quasilocal => "quasilocal",
            Command::Certificate => "certificate",
            Command::Regress => "regress",
        }
    }
}

/// Flags that do not live in the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Omit timing so reruns are byte-identical.
    pub deterministic: bool,
    /// Substring selecting regression criteria.
    pub filter: Option<String>,
    /// Worker thread cap; `None` uses rayon's default.
    pub threads: Option<usize>,
}

/// Rows written as CSV with a header line.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Output { path: "csv".into(), message: e.to_string() };
        w.write_record(&self.header).map_err(err)?;
        for row in &self.rows {
            w.write_record(row).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output { path: "csv".into(), message: e.to_string() })?;
        String::from_utf8(bytes).map_err(|e| CliError::Output { path: "csv".into(), message: e.to_string() })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_csv()?)
            .map_err(|e| CliError::Output { path: path.display().to_string(), message: e.to_string() })
    }
}

/// Envelope plus optional CSV curve and human-readable table.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub envelope: ReportEnvelope,
    pub csv: Option<Table>,
    pub table: Option<String>,
}

/// Runs a command on a thread pool capped by `options.threads`.
pub fn run(command: Command, config: &RunConfig, options: &RunOptions) -> Result<Outcome, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = options.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let mut outcome = pool.install(|| match command {
        Command::Constraints => constraints(config),
        Command::Massbound => massbound(config),
        Command::Quasilocal => quasilocal_cmd(config),
        Command::Certificate => certificate(config),
        Command::Regress => regress::run_suite(config, options),
    })?;
    if !options.deterministic {
        outcome.envelope.timing = Some(Timing { wall_seconds: start.elapsed().as_secs_f64(), threads: pool.current_num_threads() });
    }
    Ok(outcome)
}

fn num(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone, Serialize)]
struct PatchConstraints {
    index: usize,
    lo: f64,
    hi: f64,
    dec: DecReport,
    max_abs_scalar_curvature: f64,
    max_abs_mu: f64,
    max_abs_j_radial: f64,
}

#[derive(Debug, Clone, Serialize)]
struct ConstraintsReport {
    scenario: String,
    patches: Vec<PatchConstraints>,
    corners: Vec<CornerInterface>,
    expectations: Expectations,
    dec_holds: bool,
    max_abs_mu: f64,
    max_abs_j_radial: f64,
}

/// Samples `R`, `μ`, `J` and the DEC margin on every patch.
pub fn constraints(config: &RunConfig) -> Result<Outcome, CliError> {
    let data = config.build_scenario()?;
    let n = config.constraints.samples;
    let mut table = Table::new(&["patch", "r", "scalar_curvature", "mu", "j_radial", "dec_margin"]);
    let mut patches = Vec::new();
    for (index, patch) in data.patches().iter().enumerate() {
        let dom = patch.domain();
        let (mut max_r, mut max_mu, mut max_j) = (0.0f64, 0.0f64, 0.0f64);
        for k in 0..n {
            let r = dom.lo + dom.width() * k as f64 / (n - 1) as f64;
            let c = patch.constraints(r)?;
            max_r = max_r.max(c.scalar_curvature.abs());
            max_mu = max_mu.max(c.mu.abs());
            max_j = max_j.max(c.j_radial.abs());
            table.push(vec![index.to_string(), num(r), num(c.scalar_curvature), num(c.mu), num(c.j_radial), num(c.dec_margin)]);
        }
        patches.push(PatchConstraints {
            index,
            lo: dom.lo,
            hi: dom.hi,
            dec: patch.dec_check(n)?,
            max_abs_scalar_curvature: max_r,
            max_abs_mu: max_mu,
            max_abs_j_radial: max_j,
        });
    }
    let report = ConstraintsReport {
        scenario: data.name.clone(),
        dec_holds: patches.iter().all(|p| p.dec.holds),
        max_abs_mu: patches.iter().map(|p| p.max_abs_mu).fold(0.0, f64::max),
        max_abs_j_radial: patches.iter().map(|p| p.max_abs_j_radial).fold(0.0, f64::max),
        corners: data.interfaces().to_vec(),
        expectations: data.expectations.clone(),
        patches,
    };
    let mut env = ReportEnvelope::new(Command::Constraints.name(), config);
    let min_margin = report.patches.iter().map(|p| p.dec.min_margin).fold(f64::INFINITY, f64::min);
    env.add_check("dec", report.dec_holds, format!("min mu - |J| = {min_margin:e}"));
    if report.expectations.vacuum {
        let tol = config.tolerances.vacuum;
        let vacuum = report.max_abs_mu <= tol && report.max_abs_j_radial <= tol;
        env.add_check("vacuum", vacuum, format!("max |mu| = {:e}, max |J| = {:e}, tolerance {tol:e}", report.max_abs_mu, report.max_abs_j_radial));
    }
    let expected = &report.expectations.corner_jumps;
    if !expected.is_empty() {
        let ok = expected.len() == report.corners.len()
            && expected.iter().zip(&report.corners).all(|(e, c)| (c.jump - e).abs() <= cornermass::harmonic::CORNER_TOLERANCE);
        let got: Vec<f64> = report.corners.iter().map(|c| c.jump).collect();
        env.add_check("corner_jumps", ok, format!("jumps {got:?}, expected {expected:?}"));
    }
    env.add_report("constraints", &report)?;
    Ok(Outcome { envelope: env, csv: Some(table), table: None })
}

/// Mass bound at every configured resolution with the grid error estimate.
pub fn massbound(config: &RunConfig) -> Result<Outcome, CliError> {
    let resolutions = &config.grid.resolutions;
    if resolutions.len() < 2 {
        return Err(ConfigError::Invalid {
            field: "grid.resolutions".into(),
            message: "massbound needs at least two resolutions for the grid error estimate".into(),
        }
        .into());
    }
    let data = config.build_scenario()?;
    let settings = config.harmonic_settings();
    let reports: Vec<MassBoundReport> = resolutions
        .par_iter()
        .map(|&n| solve_and_bound(&data, &settings.with_resolution(n)).map(|(_, r)| r))
        .collect::<Result<_, _>>()?;
    let study = GridStudy::from_reports(resolutions, reports)?;
    let mut table = Table::new(&["resolution", "slack", "theorem_slack", "lhs", "bulk", "corner", "inner", "delta_variation"]);
    for (n, r) in resolutions.iter().zip(&study.reports) {
        table.push(vec![
            n.to_string(),
            num(r.slack),
            num(r.theorem_slack),
            num(r.lhs),
            num(r.bulk),
            num(r.corner),
            num(r.inner),
            num(r.delta_variation),
        ]);
    }
    let finest = study.reports.last().expect("at least two reports");
    let mut env = ReportEnvelope::new(Command::Massbound.name(), config);
    env.add_check(
        "slack_within_grid_error",
        study.holds,
        format!(
            "slack {:e} against -eps_grid {:e}; corner hypothesis violated: {}",
            finest.slack, -study.epsilon_grid, finest.corner_hypothesis_violated
        ),
    );
    env.add_report("massbound", &study)?;
    Ok(Outcome { envelope: env, csv: Some(table), table: None })
}

#[derive(Debug, Clone, Serialize)]
struct PipelineSkipped {
    reason: String,
}

/// Quasilocal masses, extension chain and hull comparisons of one boundary.
pub fn quasilocal_cmd(config: &RunConfig) -> Result<Outcome, CliError> {
    let data = config.build_scenario()?;
    let q = &config.quasilocal;
    let side = match q.side.as_deref() {
        Some("inner") => Some(Side::Inner),
        Some("outer") => Some(Side::Outer),
        _ => None,
    };
    let report = quasilocal(&data, q.r0, side)?;
    let boundary = boundary_data(&data, q.r0, side)?;
    let comparison = comparison_check(&report, &data, &q.hull_radii)?;
    let mut env = ReportEnvelope::new(Command::Quasilocal.name(), config);
    let mut table = Table::new(&["r", "f", "Q"]);
    match quasilocal_pipeline(boundary) {
        Ok(p) => {
            for s in &p.extension.samples {
                table.push(vec![num(s.r), num(s.f), num(s.q)]);
            }
            env.add_check("extension_chain", p.chain_holds, format!("W - E_ext = {:e}", p.w_minus_e_ext));
            env.add_report("pipeline", &p)?;
        }
        Err(ExtensionError::Hypothesis(reason)) => env.add_report("pipeline", &PipelineSkipped { reason })?,
        Err(e) => return Err(e.into()),
    }
    if let Some(m_ly) = report.m_ly {
        env.add_check("w_dominates_liu_yau", report.w - m_ly >= -1e-12, format!("W - m_LY = {:e}", report.w - m_ly));
    }
    let verdicts: Vec<Verdict> = comparison.hulls.iter().map(|h| h.verdict).chain(comparison.penrose.map(|p| p.verdict)).collect();
    let failed = verdicts.iter().filter(|v| **v == Verdict::Fail).count();
    let not_applicable = verdicts.iter().filter(|v| **v == Verdict::NotApplicable).count();
    env.add_check(
        "comparison",
        failed == 0,
        format!("{} comparisons, {failed} failed, {not_applicable} not applicable", verdicts.len()),
    );
    env.add_report("quasilocal", &report)?;
    env.add_report("comparison", &comparison)?;
    Ok(Outcome { envelope: env, csv: Some(table), table: None })
}

#[derive(Debug, Clone, Serialize)]
struct CertificateSweep {
    r0: f64,
    f: f64,
    h0: f64,
    certified: usize,
    /// Smallest certified `H − f`, if any.
    threshold: Option<f64>,
    verdicts: Vec<CertificateVerdict>,
}

/// Fill-in certificates over `H − f ∈ (0, gap_max]`.
pub fn certificate(config: &RunConfig) -> Result<Outcome, CliError> {
    let c = &config.certificate;
    let f = c.tr_sigma_alpha.hypot(c.beta);
    let gaps: Vec<f64> = (1..=c.steps).map(|k| c.gap_max * k as f64 / c.steps as f64).collect();
    let verdicts: Vec<CertificateVerdict> =
        gaps.par_iter().map(|&g| fillin_certificate(c.r0, f + g, c.tr_sigma_alpha, c.beta)).collect::<Result<_, _>>()?;
    let h0 = 2.0 / c.r0;
    let certified = |v: &CertificateVerdict| v.verdict == FillInVerdict::NoDecFillIn;
    let mut table = Table::new(&["h_minus_f", "h", "e_ext", "margin", "certified"]);
    for v in &verdicts {
        table.push(vec![num(v.h_eff), num(v.h), num(v.e_ext), num(v.margin), u8::from(certified(v)).to_string()]);
    }
    let consistent = verdicts.iter().all(|v| {
        let gap = v.h_eff - h0;
        gap.abs() <= 1e-6 * h0 || certified(v) == (gap > 0.0)
    });
    let sweep = CertificateSweep {
        r0: c.r0,
        f,
        h0,
        certified: verdicts.iter().filter(|v| certified(v)).count(),
        threshold: verdicts.iter().filter(|v| certified(v)).map(|v| v.h_eff).reduce(f64::min),
        verdicts,
    };
    let mut env = ReportEnvelope::new(Command::Certificate.name(), config);
    env.add_check(
        "threshold",
        consistent,
        format!("{} of {} certified; certificates expected exactly where H - f > H0 = {h0}", sweep.certified, sweep.verdicts.len()),
    );
    env.add_report("certificate", &sweep)?;
    Ok(Outcome { envelope: env, csv: Some(table), table: None })
}
