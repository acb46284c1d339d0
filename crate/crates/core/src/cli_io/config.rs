//! Run configuration in TOML.
//!
//! ```toml
//! grid.n = 256          # power of two, >= 8
//! grid.L = 8.0          # box half length
//! time.T = 1.0
//! time.dt = 0.01
//! mollify.n = 4         # radius 1/n must span three cells
//! sigma = 0.5           # in ]0, 2[
//! scenario = "single_atom"   # single_atom | two_atom | rotation_test
//! output.dir = "out"
//! output.cadence = 0    # snapshot every k steps, 0 = final only
//! seed = 7
//! suites = ["partition", "bony"]
//! verify.corpus = 50
//! ```
//!
//! Every key is optional; unknown keys are errors.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::measures::mollify::MIN_CELLS_PER_RADIUS;
use crate::solver::{Scenario, STANDARD};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("config error")?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " at line {l}, column {c}")?;
        }
        if let Some(k) = &self.key {
            write!(f, " in `{k}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Partition,
    Bony,
    Product,
    LogInterp,
    Heat,
    Measures,
    Flowmap,
    Solver,
    Stability,
    Ladder,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Partition,
        Suite::Bony,
        Suite::Product,
        Suite::LogInterp,
        Suite::Heat,
        Suite::Measures,
        Suite::Flowmap,
        Suite::Solver,
        Suite::Stability,
        Suite::Ladder,
    ];

    /// Suites run when the config names none.
    pub const DEFAULT: [Suite; 8] = [
        Suite::Partition,
        Suite::Bony,
        Suite::Product,
        Suite::LogInterp,
        Suite::Heat,
        Suite::Measures,
        Suite::Flowmap,
        Suite::Solver,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Partition => "partition",
            Suite::Bony => "bony",
            Suite::Product => "product",
            Suite::LogInterp => "log_interp",
            Suite::Heat => "heat",
            Suite::Measures => "measures",
            Suite::Flowmap => "flowmap",
            Suite::Solver => "solver",
            Suite::Stability => "stability",
            Suite::Ladder => "ladder",
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
    #[serde(rename = "L")]
    pub half_length: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            n: STANDARD.n,
            half_length: STANDARD.half_length,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection {
            t_final: STANDARD.t_final,
            dt: STANDARD.dt,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MollifySection {
    pub n: u32,
}

impl Default for MollifySection {
    fn default() -> Self {
        MollifySection { n: STANDARD.n_mollify }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub cadence: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            cadence: 0,
        }
    }
}

/// Sizes of the verification suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// Random fields per grid in the partition suite.
    pub fields: usize,
    /// Pairs in the Bony and product corpora.
    pub corpus: usize,
    /// Functions in the interpolation corpus.
    pub gaussians: usize,
    /// Coarse and fine grids of the refinement comparisons.
    pub grids: Vec<usize>,
    /// Seed lattice stride of the flow map co-integrated with the solver.
    pub flow_stride: usize,
    /// Horizon and step of the solver run carrying the flow map.
    pub flow_t: f64,
    pub flow_dt: f64,
    /// Random measure triples in the metric suite.
    pub triples: usize,
    pub ladder_n: usize,
    pub ladder_mollify: Vec<u32>,
    pub ladder_t: f64,
    pub ladder_dt: f64,
    pub stability_n: usize,
    pub stability_dt: f64,
    pub stability_t: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            fields: 100,
            corpus: 50,
            gaussians: 30,
            grids: vec![128, 256],
            flow_stride: 64,
            flow_t: 0.5,
            flow_dt: 1e-3,
            triples: 200,
            ladder_n: 512,
            ladder_mollify: vec![8, 16, 32, 64],
            ladder_t: 0.1,
            ladder_dt: 1e-3,
            stability_n: 64,
            stability_dt: 0.02,
            stability_t: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridSection,
    pub time: TimeSection,
    pub mollify: MollifySection,
    pub sigma: f64,
    pub scenario: Scenario,
    pub output: OutputSection,
    pub seed: u64,
    pub suites: Option<Vec<Suite>>,
    pub verify: VerifySection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridSection::default(),
            time: TimeSection::default(),
            mollify: MollifySection::default(),
            sigma: STANDARD.sigma,
            scenario: Scenario::SingleAtom,
            output: OutputSection::default(),
            seed: 7,
            suites: None,
            verify: VerifySection::default(),
        }
    }
}

fn range(key: &str, message: String) -> ConfigError {
    ConfigError {
        key: Some(key.to_string()),
        line: None,
        column: None,
        message,
    }
}

impl RunConfig {
    pub fn selected_suites(&self) -> Vec<Suite> {
        self.suites.clone().unwrap_or_else(|| Suite::DEFAULT.to_vec())
    }

    /// Range checks; errors name the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let pow2 = |key: &str, n: usize, min: usize| {
            if n < min || !n.is_power_of_two() {
                Err(range(key, format!("{n} must be a power of two and at least {min}")))
            } else {
                Ok(())
            }
        };
        let positive = |key: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(range(key, format!("{x} must be positive and finite")))
            }
        };
        pow2("grid.n", self.grid.n, 8)?;
        positive("grid.L", self.grid.half_length)?;
        positive("time.T", self.time.t_final)?;
        positive("time.dt", self.time.dt)?;
        if self.time.dt > self.time.t_final {
            return Err(range("time.dt", format!("{} exceeds time.T", self.time.dt)));
        }
        if self.mollify.n == 0 {
            return Err(range("mollify.n", "must be at least 1".into()));
        }
        let cell = 2.0 * self.grid.half_length / self.grid.n as f64;
        let radius = 1.0 / self.mollify.n as f64;
        if radius < MIN_CELLS_PER_RADIUS * cell {
            return Err(range(
                "mollify.n",
                format!("radius 1/{} spans fewer than {MIN_CELLS_PER_RADIUS} cells of width {cell}", self.mollify.n),
            ));
        }
        if radius >= self.grid.half_length {
            return Err(range("mollify.n", "mollifier radius exceeds the box".into()));
        }
        if !(self.sigma > 0.0 && self.sigma < 2.0) {
            return Err(range("sigma", format!("{} must lie in ]0, 2[", self.sigma)));
        }
        // TOML integers are signed 64-bit
        if self.seed > i64::MAX as u64 {
            return Err(range("seed", format!("{} exceeds {}", self.seed, i64::MAX)));
        }
        let v = &self.verify;
        for (key, count) in [
            ("verify.fields", v.fields),
            ("verify.corpus", v.corpus),
            ("verify.gaussians", v.gaussians),
            ("verify.triples", v.triples),
            ("verify.flow_stride", v.flow_stride),
        ] {
            if count == 0 {
                return Err(range(key, "must be at least 1".into()));
            }
        }
        if v.grids.len() != 2 || v.grids[1] != 2 * v.grids[0] {
            return Err(range("verify.grids", "expected [n, 2n]".into()));
        }
        pow2("verify.grids", v.grids[0], 16)?;
        positive("verify.flow_t", v.flow_t)?;
        positive("verify.flow_dt", v.flow_dt)?;
        pow2("verify.ladder_n", v.ladder_n, 16)?;
        if v.ladder_mollify.len() < 2 || v.ladder_mollify.windows(2).any(|w| w[1] != 2 * w[0]) || v.ladder_mollify[0] == 0 {
            return Err(range("verify.ladder_mollify", "expected a doubling sequence such as [8, 16, 32, 64]".into()));
        }
        positive("verify.ladder_t", v.ladder_t)?;
        positive("verify.ladder_dt", v.ladder_dt)?;
        pow2("verify.stability_n", v.stability_n, 16)?;
        positive("verify.stability_dt", v.stability_dt)?;
        positive("verify.stability_t", v.stability_t)?;
        Ok(())
    }

    /// TOML text that parses back to `self`.
    pub fn to_toml(&self) -> Result<String, ConfigError> {
        self.validate()?;
        toml::to_string(self).map_err(|e| ConfigError {
            key: None,
            line: None,
            column: None,
            message: e.to_string(),
        })
    }
}

/// `(line, column)` of a 0-based byte offset, both 1-based.
fn position(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(offset, |i| offset - i - 1) + 1;
    (line, column)
}

fn normalize_key(raw: &str) -> String {
    raw.split('.')
        .map(|p| p.trim().trim_matches('"'))
        .collect::<Vec<_>>()
        .join(".")
}

/// Dotted key assigned on `line` (1-based), including its table header.
fn key_on_line(text: &str, line: usize) -> Option<String> {
    let mut table = String::new();
    for (i, l) in text.lines().enumerate() {
        let t = l.trim();
        if t.starts_with('[') && !t.starts_with("[[") {
            table = normalize_key(t.trim_start_matches('[').split(']').next().unwrap_or(""));
        }
        if i + 1 == line {
            let (lhs, _) = t.split_once('=')?;
            let key = normalize_key(lhs);
            return Some(if table.is_empty() { key } else { format!("{table}.{key}") });
        }
    }
    None
}

/// Line and column of the assignment to a dotted key.
fn locate_key(text: &str, key: &str) -> Option<(usize, usize)> {
    let mut offset = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if key_on_line(text, i + 1).as_deref() == Some(key) {
            let indent = l.len() - l.trim_start().len();
            return Some(position(text, offset + indent));
        }
        offset += l.len();
    }
    None
}

/// Parses and validates a config.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let span = e.span();
        let (line, column) = span.clone().map(|s| position(text, s.start)).unzip();
        let message = e.message().to_string();
        // unknown keys: the span covers the key itself
        let key = match (&span, message.starts_with("unknown field")) {
            (Some(s), true) => line.and_then(|l| key_on_line(text, l)).or_else(|| Some(text[s.clone()].to_string())),
            _ => line.and_then(|l| key_on_line(text, l)),
        };
        ConfigError {
            key,
            line,
            column,
            message,
        }
    })?;
    cfg.validate().map_err(|mut e| {
        if let Some(k) = &e.key {
            if let Some((l, c)) = locate_key(text, k) {
                e.line = Some(l);
                e.column = Some(c);
            }
        }
        e
    })?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
    }

    #[test]
    fn range_error_names_key_and_line() {
        let e = parse_config("sigma = 0.5\ngrid.n = 100\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("grid.n"));
        assert_eq!((e.line, e.column), (Some(2), Some(1)));
        let e = parse_config("[grid]\nn = 100\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("grid.n"));
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn unknown_key_rejected() {
        let e = parse_config("grid.m = 3\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("grid.m"));
        assert_eq!(e.line, Some(1));
        let e = parse_config("colour = 1\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("colour"));
    }

    #[test]
    fn syntax_error_has_position() {
        let e = parse_config("time.T = = 1\n").unwrap_err();
        assert_eq!(e.line, Some(1));
        assert!(e.column.is_some());
    }
}
