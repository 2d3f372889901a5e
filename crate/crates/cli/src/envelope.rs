//! Versioned JSON report wrapping every command.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::finite::first_non_finite;
use crate::CliError;

/// Version of the envelope layout described by `schema/report.schema.json`.
pub const SCHEMA_VERSION: u32 = 1;

pub const TOOL_NAME: &str = "corner-mass";

/// One gating check of a command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// All checks and their conjunction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictSummary {
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
    pub threads: usize,
}

/// Tool identity, config echo, per-module reports, verdicts and timing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportEnvelope {
    pub tool: String,
    pub tool_version: String,
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub reports: BTreeMap<String, Value>,
    pub verdict: VerdictSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl ReportEnvelope {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            tool: TOOL_NAME.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config: config.clone(),
            reports: BTreeMap::new(),
            verdict: VerdictSummary { passed: true, checks: Vec::new() },
            timing: None,
        }
    }

    /// Embeds a module report; non-finite floats are a numerical failure.
    pub fn add_report<T: Serialize + ?Sized>(&mut self, name: &str, report: &T) -> Result<(), CliError> {
        if let Some(path) = first_non_finite(report) {
            return Err(CliError::NonFinite(format!("{name}.{path}")));
        }
        let value = serde_json::to_value(report).map_err(|e| CliError::Numerical(e.to_string()))?;
        self.reports.insert(name.into(), value);
        Ok(())
    }

    pub fn add_check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.verdict.checks.push(Check { name: name.into(), passed, detail: detail.into() });
        self.verdict.passed = self.verdict.checks.iter().all(|c| c.passed);
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String, CliError> {
        if let Some(path) = first_non_finite(self) {
            return Err(CliError::NonFinite(path));
        }
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Numerical(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}
