//! Golden files: one `[criterion]` section per acceptance criterion with
//! lines `key = <expectation>`.
//!
//! | Expectation | Passes when |
//! |-------------|-------------|
//! | `v +/- t` | `|measured − v| ≤ t` |
//! | `min v` | `measured ≥ v` |
//! | `max v` | `measured ≤ v` |
//! | `true`, `false` | flag equals it |

use std::fmt;

use serde::Serialize;

use crate::config::{parse_sections, ConfigError, Entry};

/// Expected value of one measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    Approx { value: f64, tolerance: f64 },
    AtLeast { value: f64 },
    AtMost { value: f64 },
    Flag { value: bool },
}

/// A measured quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Measured {
    Number(f64),
    Flag(bool),
}

impl fmt::Display for Measured {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measured::Number(v) => write!(f, "{v:e}"),
            Measured::Flag(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Approx { value, tolerance } => write!(f, "{value} +/- {tolerance:e}"),
            Expectation::AtLeast { value } => write!(f, "min {value}"),
            Expectation::AtMost { value } => write!(f, "max {value}"),
            Expectation::Flag { value } => write!(f, "{value}"),
        }
    }
}

impl Expectation {
    fn parse(entry: &Entry) -> Result<Self, ConfigError> {
        let v = entry.value.trim();
        let number = |s: &str| {
            s.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| entry.error(format!("expected a finite number, got '{}'", s.trim())))
        };
        if v == "true" || v == "false" {
            return Ok(Expectation::Flag { value: v == "true" });
        }
        if let Some(rest) = v.strip_prefix("min ") {
            return Ok(Expectation::AtLeast { value: number(rest)? });
        }
        if let Some(rest) = v.strip_prefix("max ") {
            return Ok(Expectation::AtMost { value: number(rest)? });
        }
        let (value, tolerance) =
            v.split_once("+/-").ok_or_else(|| entry.error("expected 'v +/- t', 'min v', 'max v', true or false"))?;
        let tolerance = number(tolerance)?;
        if tolerance < 0.0 {
            return Err(entry.error("tolerance must be nonnegative"));
        }
        Ok(Expectation::Approx { value: number(value)?, tolerance })
    }

    pub fn accepts(&self, measured: Measured) -> bool {
        match (*self, measured) {
            (Expectation::Approx { value, tolerance }, Measured::Number(m)) => (m - value).abs() <= tolerance,
            (Expectation::AtLeast { value }, Measured::Number(m)) => m >= value,
            (Expectation::AtMost { value }, Measured::Number(m)) => m <= value,
            (Expectation::Flag { value }, Measured::Flag(b)) => b == value,
            _ => false,
        }
    }
}

/// One golden line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenEntry {
    pub key: String,
    pub expectation: Expectation,
    /// Expectation as written.
    pub text: String,
    pub line: usize,
}

/// Golden entries of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenCriterion {
    pub name: String,
    pub entries: Vec<GoldenEntry>,
}

/// Parses a golden file; each criterion appears once.
pub fn parse_goldens(text: &str) -> Result<Vec<GoldenCriterion>, ConfigError> {
    let mut out: Vec<GoldenCriterion> = Vec::new();
    for section in parse_sections(text)? {
        if out.iter().any(|c| c.name == section.name) {
            return Err(ConfigError::Syntax { line: section.line, message: format!("duplicate criterion [{}]", section.name) });
        }
        let entries = section
            .entries
            .iter()
            .map(|e| Ok(GoldenEntry { key: e.key.clone(), expectation: Expectation::parse(e)?, text: e.value.clone(), line: e.line }))
            .collect::<Result<_, ConfigError>>()?;
        out.push(GoldenCriterion { name: section.name, entries });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expectations_parse_and_grade() {
        let g = parse_goldens("[c]\na = -0.5 +/- 1e-4\nb = min 1.7\nc = max 10\nd = true\n").unwrap();
        let e: Vec<Expectation> = g[0].entries.iter().map(|e| e.expectation).collect();
        assert_eq!(e[0], Expectation::Approx { value: -0.5, tolerance: 1e-4 });
        assert!(e[0].accepts(Measured::Number(-0.50009)));
        assert!(!e[0].accepts(Measured::Number(-0.5002)));
        assert!(e[1].accepts(Measured::Number(1.7)) && !e[1].accepts(Measured::Number(1.69)));
        assert!(e[2].accepts(Measured::Number(9.0)) && !e[2].accepts(Measured::Number(10.5)));
        assert!(e[3].accepts(Measured::Flag(true)) && !e[3].accepts(Measured::Number(1.0)));
    }

    #[test]
    fn malformed_lines_report_position() {
        let e = parse_goldens("[c]\n\na = about 3\n").unwrap_err();
        assert!(matches!(e, ConfigError::Field { line: 3, ref field, .. } if field == "a"));
        assert!(parse_goldens("[c]\n[c]\n").is_err());
        assert!(parse_goldens("[c]\na = 1 +/- -1\n").is_err());
    }
}
