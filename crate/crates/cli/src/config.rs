//! Run configuration read from `[section]` headers and `key = value` lines.
//!
//! ```text
//! # comment
//! [scenario]
//! name = schwarzschild
//! m = 1
//! r_in = 3
//!
//! [grid]
//! resolutions = 32, 64, 128
//! truncation = 40
//! delta = 0.01
//! ```
//!
//! Custom scenarios list one `[patch]` section per patch with Laurent
//! coefficients written as `power:coefficient` pairs, e.g. `f = 0:1, -1:-2`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cornermass::corner::{CustomPatch, GluedDataSet, Scenario};
use cornermass::harmonic::{Direction, HarmonicSettings, InnerBoundary};
use serde::Serialize;
use thiserror::Error;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "CORNER_MASS_THREADS";

/// Errors in the config text, its values or the environment.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}, field '{field}': {message}")]
    Field { line: usize, field: String, message: String },
    #[error("field '{field}': {message}")]
    Invalid { field: String, message: String },
    #[error("{THREADS_ENV}: {0}")]
    Threads(String),
}

/// One `key = value` line.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// A `[name]` header and the entries below it.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

fn syntax(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Syntax { line, message: message.into() }
}

/// Splits text into sections. `#` starts a comment and keys are unique
/// within a section.
pub fn parse_sections(text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split_once('#').map_or(raw, |(head, _)| head).trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| syntax(line, "unterminated section header"))?.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(syntax(line, format!("invalid section name '{name}'")));
            }
            sections.push(Section { name: name.to_string(), line, entries: Vec::new() });
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| syntax(line, "expected 'key = value'"))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(syntax(line, "missing key before '='"));
        }
        let field = |message: String| ConfigError::Field { line, field: key.to_string(), message };
        if value.is_empty() {
            return Err(field("missing value".into()));
        }
        let section = sections.last_mut().ok_or_else(|| field("appears before any [section] header".into()))?;
        if section.entries.iter().any(|e| e.key == key) {
            return Err(field(format!("duplicate key in [{}]", section.name)));
        }
        section.entries.push(Entry { key: key.to_string(), value: value.to_string(), line });
    }
    Ok(sections)
}

impl Entry {
    pub fn error(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::Field { line: self.line, field: self.key.clone(), message: message.into() }
    }

    pub fn number(&self) -> Result<f64, ConfigError> {
        parse_number(&self.value).ok_or_else(|| self.error(format!("expected a finite number, got '{}'", self.value)))
    }

    pub fn positive(&self) -> Result<f64, ConfigError> {
        let v = self.number()?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.error(format!("must be positive, got {v}")))
        }
    }

    pub fn count(&self) -> Result<usize, ConfigError> {
        self.value.parse().map_err(|_| self.error(format!("expected a nonnegative integer, got '{}'", self.value)))
    }

    pub fn flag(&self) -> Result<bool, ConfigError> {
        match self.value.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(self.error(format!("expected true or false, got '{other}'"))),
        }
    }

    /// Comma-separated items.
    pub fn list<T>(&self, item: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, ConfigError> {
        self.value
            .split(',')
            .map(str::trim)
            .map(|s| item(s).ok_or_else(|| self.error(format!("invalid list item '{s}'"))))
            .collect()
    }

    /// `power:coefficient` pairs.
    pub fn laurent(&self) -> Result<Vec<(i32, f64)>, ConfigError> {
        self.list(|s| {
            let (p, c) = s.split_once(':')?;
            Some((p.trim().parse().ok()?, parse_number(c.trim())?))
        })
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Entries of one section, with unknown keys rejected by [`Reader::finish`].
struct Reader<'a> {
    section: &'a Section,
    used: Vec<bool>,
}

impl<'a> Reader<'a> {
    fn new(section: &'a Section) -> Self {
        Self { section, used: vec![false; section.entries.len()] }
    }

    fn take(&mut self, key: &str) -> Option<&'a Entry> {
        let idx = self.section.entries.iter().position(|e| e.key == key)?;
        self.used[idx] = true;
        Some(&self.section.entries[idx])
    }

    fn require(&mut self, key: &str) -> Result<&'a Entry, ConfigError> {
        let (line, name) = (self.section.line, self.section.name.clone());
        self.take(key).ok_or_else(|| ConfigError::Field { line, field: key.into(), message: format!("[{name}] needs '{key}'") })
    }

    fn rest(&mut self) -> Vec<&'a Entry> {
        let entries = &self.section.entries;
        let out = entries.iter().zip(&self.used).filter(|(_, u)| !**u).map(|(e, _)| e).collect();
        self.used.iter_mut().for_each(|u| *u = true);
        out
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.section.entries.iter().zip(&self.used).find(|(_, u)| !**u) {
            Some((e, _)) => Err(e.error(format!("unknown key in [{}]", self.section.name))),
            None => Ok(()),
        }
    }
}

/// Scenario name, numeric parameters and custom patches.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub allow_discontinuous: bool,
    pub patches: Vec<CustomPatch>,
    #[serde(skip)]
    pub line: usize,
}

/// Harmonic solver grid and regularization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridConfig {
    /// `N` radial intervals and `N` polar cells per level, strictly increasing.
    pub resolutions: Vec<usize>,
    /// Truncation radius `L`.
    pub truncation: f64,
    pub delta: f64,
    pub stretch_scale: f64,
    /// `+z` or `-z`.
    pub direction: String,
    /// `auto`, `center`, `asymptote`, `constant` or `constant:<value>`.
    pub inner: String,
    pub damping: f64,
    pub max_picard: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub picard: f64,
    pub sor: f64,
    /// Bound on `|μ|` and `|J|` for a vacuum verdict.
    pub vacuum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintsConfig {
    pub samples: usize,
}

/// Boundary sphere and hull spheres for the quasilocal command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasilocalConfig {
    pub r0: f64,
    /// `inner` or `outer` when `r0` is a corner.
    pub side: Option<String>,
    pub hull_radii: Vec<f64>,
}

/// Sweep of `H − f` over `(0, gap_max]` in `steps` equal steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateConfig {
    pub r0: f64,
    pub tr_sigma_alpha: f64,
    pub beta: f64,
    pub gap_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct OutputConfig {
    pub report: Option<String>,
    pub csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RegressConfig {
    pub goldens: Option<String>,
}

/// Everything one command needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
    pub constraints: ConstraintsConfig,
    pub quasilocal: QuasilocalConfig,
    pub certificate: CertificateConfig,
    pub output: OutputConfig,
    pub regress: RegressConfig,
    pub topology_asserted: bool,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig {
                name: "flat".into(),
                params: BTreeMap::new(),
                allow_discontinuous: false,
                patches: Vec::new(),
                line: 0,
            },
            grid: GridConfig {
                resolutions: vec![32, 64],
                truncation: 40.0,
                delta: 1e-2,
                stretch_scale: 1.0,
                direction: "+z".into(),
                inner: "auto".into(),
                damping: 0.7,
                max_picard: 200,
            },
            tolerances: Tolerances { picard: 1e-9, sor: 1e-11, vacuum: 1e-10 },
            constraints: ConstraintsConfig { samples: 201 },
            quasilocal: QuasilocalConfig { r0: 10.0, side: None, hull_radii: Vec::new() },
            certificate: CertificateConfig { r0: 1.0, tr_sigma_alpha: 0.0, beta: 0.0, gap_max: 4.0, steps: 80 },
            output: OutputConfig::default(),
            regress: RegressConfig::default(),
            topology_asserted: true,
            base_dir: PathBuf::from("."),
        }
    }
}

fn parse_inner(value: &str) -> Option<InnerBoundary> {
    match value {
        "auto" => Some(InnerBoundary::Auto),
        "center" => Some(InnerBoundary::Center),
        "asymptote" => Some(InnerBoundary::Asymptote),
        "constant" => Some(InnerBoundary::Constant(None)),
        other => other.strip_prefix("constant:").and_then(|v| parse_number(v.trim())).map(|v| InnerBoundary::Constant(Some(v))),
    }
}

fn parse_direction(value: &str) -> Option<Direction> {
    match value {
        "+z" => Some(Direction::PlusZ),
        "-z" => Some(Direction::MinusZ),
        _ => None,
    }
}

impl RunConfig {
    /// Reads and validates a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.display().to_string(), message: e.to_string() })?;
        let mut config = Self::parse(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    /// Parses and validates config text.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        let mut saw_scenario = false;
        for section in parse_sections(text)? {
            let mut rd = Reader::new(&section);
            match section.name.as_str() {
                "scenario" => {
                    if saw_scenario {
                        return Err(syntax(section.line, "duplicate [scenario] section"));
                    }
                    saw_scenario = true;
                    let name = rd.require("name")?;
                    c.scenario.name = name.value.clone();
                    c.scenario.line = name.line;
                    if let Some(e) = rd.take("allow_discontinuous") {
                        c.scenario.allow_discontinuous = e.flag()?;
                    }
                    for e in rd.rest() {
                        c.scenario.params.insert(e.key.clone(), e.number()?);
                    }
                }
                "patch" => {
                    let lo = rd.require("lo")?.number()?;
                    let hi = rd.require("hi")?.number()?;
                    let f = rd.require("f")?.laurent()?;
                    let a = rd.take("a").map(Entry::laurent).transpose()?.unwrap_or_default();
                    let b = rd.take("b").map(Entry::laurent).transpose()?.unwrap_or_default();
                    c.scenario.patches.push(CustomPatch { lo, hi, f, a, b });
                }
                "grid" => {
                    let g = &mut c.grid;
                    if let Some(e) = rd.take("resolutions") {
                        g.resolutions = e.list(|s| s.parse().ok())?;
                        if g.resolutions.iter().any(|&n| n < 4) {
                            return Err(e.error("every resolution must be at least 4"));
                        }
                        if g.resolutions.windows(2).any(|w| w[1] <= w[0]) {
                            return Err(e.error("resolutions must be strictly increasing"));
                        }
                    }
                    if let Some(e) = rd.take("truncation") {
                        g.truncation = e.positive()?;
                    }
                    if let Some(e) = rd.take("delta") {
                        g.delta = e.positive()?;
                    }
                    if let Some(e) = rd.take("stretch_scale") {
                        g.stretch_scale = e.positive()?;
                    }
                    if let Some(e) = rd.take("direction") {
                        parse_direction(&e.value).ok_or_else(|| e.error("expected +z or -z"))?;
                        g.direction = e.value.clone();
                    }
                    if let Some(e) = rd.take("inner") {
                        parse_inner(&e.value)
                            .ok_or_else(|| e.error("expected auto, center, asymptote, constant or constant:<value>"))?;
                        g.inner = e.value.clone();
                    }
                    if let Some(e) = rd.take("damping") {
                        g.damping = e.positive()?;
                        if g.damping > 1.0 {
                            return Err(e.error("damping must lie in (0, 1]"));
                        }
                    }
                    if let Some(e) = rd.take("max_picard") {
                        g.max_picard = e.count()?;
                    }
                }
                "tolerances" => {
                    if let Some(e) = rd.take("picard") {
                        c.tolerances.picard = e.positive()?;
                    }
                    if let Some(e) = rd.take("sor") {
                        c.tolerances.sor = e.positive()?;
                    }
                    if let Some(e) = rd.take("vacuum") {
                        c.tolerances.vacuum = e.positive()?;
                    }
                }
                "constraints" => {
                    if let Some(e) = rd.take("samples") {
                        c.constraints.samples = e.count()?;
                        if c.constraints.samples < 2 {
                            return Err(e.error("need at least two samples"));
                        }
                    }
                }
                "quasilocal" => {
                    let q = &mut c.quasilocal;
                    if let Some(e) = rd.take("r0") {
                        q.r0 = e.positive()?;
                    }
                    if let Some(e) = rd.take("side") {
                        if !matches!(e.value.as_str(), "inner" | "outer") {
                            return Err(e.error("expected inner or outer"));
                        }
                        q.side = Some(e.value.clone());
                    }
                    if let Some(e) = rd.take("hull_radii") {
                        q.hull_radii = e.list(parse_number)?;
                    }
                    let range = (rd.take("hull_min"), rd.take("hull_max"), rd.take("hull_count"));
                    match range {
                        (None, None, None) => {}
                        (Some(lo), Some(hi), count) => {
                            let (a, b) = (lo.positive()?, hi.positive()?);
                            if b < a {
                                return Err(hi.error("hull_max must not be below hull_min"));
                            }
                            let n = count.map(Entry::count).transpose()?.unwrap_or(50);
                            if n < 2 {
                                return Err(count.map_or_else(|| hi.error("need two hull radii"), |e| e.error("need at least 2")));
                            }
                            q.hull_radii.extend((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64));
                        }
                        (lo, hi, count) => {
                            let e = lo.or(hi).or(count).expect("one hull key present");
                            return Err(e.error("hull ranges need both hull_min and hull_max"));
                        }
                    }
                }
                "certificate" => {
                    let k = &mut c.certificate;
                    if let Some(e) = rd.take("r0") {
                        k.r0 = e.positive()?;
                    }
                    if let Some(e) = rd.take("tr_sigma_alpha") {
                        k.tr_sigma_alpha = e.number()?;
                    }
                    if let Some(e) = rd.take("beta") {
                        k.beta = e.number()?;
                    }
                    if let Some(e) = rd.take("gap_max") {
                        k.gap_max = e.positive()?;
                    }
                    if let Some(e) = rd.take("steps") {
                        k.steps = e.count()?;
                        if k.steps == 0 {
                            return Err(e.error("need at least one step"));
                        }
                    }
                }
                "output" => {
                    c.output.report = rd.take("report").map(|e| e.value.clone());
                    c.output.csv = rd.take("csv").map(|e| e.value.clone());
                }
                "regress" => {
                    c.regress.goldens = rd.take("goldens").map(|e| e.value.clone());
                }
                "topology" => {
                    if let Some(e) = rd.take("asserted") {
                        c.topology_asserted = e.flag()?;
                    }
                }
                other => return Err(syntax(section.line, format!("unknown section [{other}]"))),
            }
            rd.finish()?;
        }
        if !c.scenario.patches.is_empty() && c.scenario.name != "custom" {
            return Err(ConfigError::Field {
                line: c.scenario.line,
                field: "name".into(),
                message: "[patch] sections need name = custom".into(),
            });
        }
        Ok(c)
    }

    /// Resolves a path from the config against its directory.
    pub fn resolve(&self, path: &str) -> PathBuf {
        self.base_dir.join(path)
    }

    /// Builds the scenario; construction failures are config errors.
    pub fn build_scenario(&self) -> Result<GluedDataSet, ConfigError> {
        let s = &self.scenario;
        let err = |message: String| ConfigError::Field { line: s.line, field: "name".into(), message };
        let scenario = if s.name == "custom" {
            if s.patches.is_empty() {
                return Err(err("custom scenarios need [patch] sections".into()));
            }
            Scenario::Custom { patches: s.patches.clone(), allow_discontinuous: s.allow_discontinuous }
        } else {
            Scenario::from_name(&s.name, &s.params).map_err(|e| err(e.to_string()))?
        };
        let mut set = scenario.build().map_err(|e| err(e.to_string()))?;
        set.topology_asserted = self.topology_asserted;
        Ok(set)
    }

    /// Solver settings at the first resolution.
    pub fn harmonic_settings(&self) -> HarmonicSettings {
        let g = &self.grid;
        HarmonicSettings {
            outer_radius: g.truncation,
            stretch_scale: g.stretch_scale,
            delta: g.delta,
            direction: parse_direction(&g.direction).unwrap_or(Direction::PlusZ),
            inner: parse_inner(&g.inner).unwrap_or(InnerBoundary::Auto),
            picard_tolerance: self.tolerances.picard,
            max_picard: g.max_picard,
            damping: g.damping,
            sor_tolerance: self.tolerances.sor,
            ..HarmonicSettings::default()
        }
        .with_resolution(g.resolutions[0])
    }
}

/// Thread cap from [`THREADS_ENV`], `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>, ConfigError> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(ConfigError::Threads(e.to_string())),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError::Threads(format!("expected a positive integer, got '{v}'"))),
        },
    }
}
