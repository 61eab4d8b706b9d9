//! Key-value config files and the resolved harness settings.
//!
//! ```text
//! # comments run to the end of the line
//! seed = 7
//! format = csv
//! points = 512
//! ```
//!
//! Keys are the long flag names, with `-` and `_` interchangeable. A flag on
//! the command line overrides the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use orlicz_core::Boundary;
use thiserror::Error;

use crate::family::GridSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Syntax { path: PathBuf, line: usize, msg: String },
    #[error("{path}:{line}: {key}: {msg}")]
    Value { path: PathBuf, line: usize, key: String, msg: String },
    #[error("{key}: {msg}")]
    Invalid { key: String, msg: String },
}

/// Every key accepted in a config file.
pub const KEYS: &[&str] = &[
    "seed",
    "report",
    "format",
    "threads",
    "n",
    "points",
    "half_width",
    "boundary",
    "family_size",
    "ratio_points",
    "cases",
    "suite",
    "space",
    "a",
    "s",
    "fn",
    "sigma",
    "r",
    "out",
    "t_min",
    "t_max",
    "count",
];

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    line: usize,
    value: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    path: PathBuf,
    entries: BTreeMap<String, Entry>,
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let syntax = |msg: String| ConfigError::Syntax { path: path.to_path_buf(), line, msg };
            let (key, value) = content.split_once('=').ok_or_else(|| syntax("expected `key = value`".into()))?;
            let key = normalize(key);
            if !KEYS.contains(&key.as_str()) {
                return Err(syntax(format!("unknown key {key:?}")));
            }
            let value = value.trim().trim_matches('"').to_string();
            if let Some(prev) = entries.insert(key.clone(), Entry { line, value }) {
                return Err(syntax(format!("{key} already set on line {}", prev.line)));
            }
        }
        Ok(Self { path: path.to_path_buf(), entries })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize(key)).map(|e| e.value.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let Some(e) = self.entries.get(&normalize(key)) else {
            return Ok(None);
        };
        e.value.parse::<T>().map(Some).map_err(|err| ConfigError::Value {
            path: self.path.clone(),
            line: e.line,
            key: key.to_string(),
            msg: err.to_string(),
        })
    }

    /// `flag` if given, otherwise the file value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("expected json or csv, got {other:?}")),
        }
    }
}

pub fn parse_boundary(s: &str) -> Result<Boundary, String> {
    match s.to_ascii_lowercase().as_str() {
        "zero" => Ok(Boundary::Zero),
        "interior" => Ok(Boundary::Interior),
        other => Err(format!("expected zero or interior, got {other:?}")),
    }
}

/// Knobs shared by the verification suites.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub n: usize,
    /// Grid size for single-resolution norm work.
    pub points: usize,
    pub half_width: f64,
    pub boundary: Boundary,
    pub family_size: usize,
    /// Coarse grid size of the refinement-stability experiments; the fine
    /// grid doubles it.
    pub ratio_points: usize,
    /// Overrides the per-suite case counts when set.
    pub cases: Option<usize>,
    /// Restricts the convolution suite to one sub-suite.
    pub sub_suite: Option<String>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            seed: 1,
            n: 1,
            points: 1024,
            half_width: 8.0,
            boundary: Boundary::Zero,
            family_size: 30,
            ratio_points: 256,
            cases: None,
            sub_suite: None,
        }
    }
}

impl Settings {
    pub fn grid(&self) -> GridSpec {
        GridSpec { n: self.n, points: self.points, half_width: self.half_width }
    }

    pub fn ratio_grid(&self) -> GridSpec {
        GridSpec { n: self.n, points: self.ratio_points, half_width: self.half_width }
    }

    pub fn cases_or(&self, default: usize) -> usize {
        self.cases.unwrap_or(default)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, msg: &str| Err(ConfigError::Invalid { key: key.into(), msg: msg.into() });
        if !(1..=2).contains(&self.n) {
            return bad("n", "dimension must be 1 or 2");
        }
        for (key, p) in [("points", self.points), ("ratio_points", self.ratio_points)] {
            if p < 8 || !p.is_power_of_two() {
                return bad(key, "must be a power of two, at least 8");
            }
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return bad("half_width", "must be positive");
        }
        if self.family_size < 2 {
            return bad("family_size", "need at least two members");
        }
        Ok(())
    }

    /// Settings as they appear in reports.
    pub fn record(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("n".into(), self.n.to_string());
        m.insert("points".into(), self.points.to_string());
        m.insert("half_width".into(), self.half_width.to_string());
        m.insert("boundary".into(), format!("{:?}", self.boundary).to_lowercase());
        m.insert("family_size".into(), self.family_size.to_string());
        m.insert("ratio_points".into(), self.ratio_points.to_string());
        if let Some(c) = self.cases {
            m.insert("cases".into(), c.to_string());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reports_locations() {
        let text = "# harness\nseed = 9\nhalf-width = 4.0 # box\n\nformat = csv\n";
        let cfg = ConfigFile::parse(text, Path::new("run.cfg")).unwrap();
        assert_eq!(cfg.get::<u64>("seed").unwrap(), Some(9));
        assert_eq!(cfg.get::<f64>("half_width").unwrap(), Some(4.0));
        assert_eq!(cfg.get::<Format>("format").unwrap(), Some(Format::Csv));
        assert_eq!(cfg.pick(Some(3u64), "seed").unwrap(), Some(3));

        let err = ConfigFile::parse("seed = 1\nbogus = 2\n", Path::new("x.cfg")).unwrap_err();
        assert_eq!(err.to_string(), "x.cfg:2: unknown key \"bogus\"");
        let cfg = ConfigFile::parse("\n\nseed = many\n", Path::new("y.cfg")).unwrap();
        let err = cfg.get::<u64>("seed").unwrap_err();
        assert!(err.to_string().starts_with("y.cfg:3: seed:"), "{err}");
        assert!(ConfigFile::parse("seed 1\n", Path::new("z")).is_err());
    }
}
