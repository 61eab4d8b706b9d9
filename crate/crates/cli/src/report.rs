//! Verification reports: JSON (`"schema": 1`) and flat CSV.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

pub const SCHEMA: u32 = 1;

/// A float that serializes non-finite values as the strings `"inf"`,
/// `"-inf"` and `"nan"`, which plain JSON cannot hold.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&fmt_num(self.0))
        }
    }
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num(v)
    }
}

pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:e}")
    }
}

/// First 16 hex digits of the SHA-256 of the case inputs.
pub fn digest(inputs: &str) -> String {
    let hash = Sha256::digest(inputs.as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseRecord {
    pub index: usize,
    pub group: String,
    pub inputs: String,
    pub digest: String,
    pub lhs: Num,
    pub rhs: Num,
    pub ratio: Num,
    pub margin: Num,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CaseRecord {
    /// A comparison `lhs <= rhs`; the ratio is `lhs / rhs` (0 when `lhs = 0`).
    pub fn new(group: &str, inputs: String, lhs: f64, rhs: f64, pass: bool) -> Self {
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        let margin = if rhs == f64::INFINITY { f64::INFINITY } else { rhs - lhs };
        Self {
            index: 0,
            group: group.to_string(),
            digest: digest(&inputs),
            inputs,
            lhs: lhs.into(),
            rhs: rhs.into(),
            ratio: ratio.into(),
            margin: margin.into(),
            pass,
            note: None,
        }
    }

    /// A case that could not be evaluated.
    pub fn failed(group: &str, inputs: String, error: impl std::fmt::Display) -> Self {
        let mut c = Self::new(group, inputs, f64::NAN, f64::NAN, false);
        c.note = Some(error.to_string());
        c
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Aggregate {
    pub cases: usize,
    pub min_ratio: Num,
    pub max_ratio: Num,
    pub median_ratio: Num,
    pub worst_margin: Num,
}

impl Aggregate {
    pub fn of<'a>(cases: impl IntoIterator<Item = &'a CaseRecord>) -> Self {
        let cases: Vec<&CaseRecord> = cases.into_iter().collect();
        let mut ratios: Vec<f64> = cases.iter().map(|c| c.ratio.0).filter(|r| !r.is_nan()).collect();
        ratios.sort_by(f64::total_cmp);
        let median = match ratios.len() {
            0 => f64::NAN,
            k if k % 2 == 1 => ratios[k / 2],
            k => 0.5 * (ratios[k / 2 - 1] + ratios[k / 2]),
        };
        let worst = cases.iter().map(|c| c.margin.0).filter(|m| !m.is_nan()).fold(f64::INFINITY, f64::min);
        Self {
            cases: cases.len(),
            min_ratio: ratios.first().copied().unwrap_or(f64::NAN).into(),
            max_ratio: ratios.last().copied().unwrap_or(f64::NAN).into(),
            median_ratio: median.into(),
            worst_margin: worst.into(),
        }
    }
}

/// A named pass/fail criterion of a suite: `value` compared with `bound`.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: Num,
    pub bound: Num,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub suite: String,
    pub pass: bool,
    pub seed: u64,
    pub prng: &'static str,
    pub settings: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub aggregate: Aggregate,
    pub groups: BTreeMap<String, Aggregate>,
    pub cases: Vec<CaseRecord>,
    pub wall_time_s: f64,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}: {} (value {}, bound {})", c.name, c.detail, fmt_num(c.value.0), fmt_num(c.bound.0)))
            .collect();
        let bad = self.cases.iter().filter(|c| !c.pass).count();
        if bad > 0 {
            out.push(format!("{bad} of {} cases failed", self.cases.len()));
        }
        out
    }
}

/// Collects cases and checks; cases are numbered in insertion order.
pub struct SuiteBuilder {
    suite: String,
    seed: u64,
    started: Instant,
    settings: BTreeMap<String, String>,
    tolerances: BTreeMap<String, f64>,
    checks: Vec<Check>,
    cases: Vec<CaseRecord>,
}

impl SuiteBuilder {
    pub fn new(suite: &str, seed: u64) -> Self {
        Self {
            suite: suite.to_string(),
            seed,
            started: Instant::now(),
            settings: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            checks: Vec::new(),
            cases: Vec::new(),
        }
    }

    pub fn setting(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.settings.insert(key.to_string(), value.to_string());
        self
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }

    pub fn case(&mut self, mut case: CaseRecord) {
        case.index = self.cases.len();
        self.cases.push(case);
    }

    pub fn cases(&mut self, cases: impl IntoIterator<Item = CaseRecord>) {
        for c in cases {
            self.case(c);
        }
    }

    pub fn check(&mut self, name: &str, pass: bool, value: f64, bound: f64, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), pass, value: value.into(), bound: bound.into(), detail: detail.into() });
    }

    pub fn finish(self) -> SuiteReport {
        let pass = self.checks.iter().all(|c| c.pass) && self.cases.iter().all(|c| c.pass);
        let mut grouped: BTreeMap<String, Vec<&CaseRecord>> = BTreeMap::new();
        for c in &self.cases {
            grouped.entry(c.group.clone()).or_default().push(c);
        }
        let groups = grouped.into_iter().map(|(g, cs)| (g, Aggregate::of(cs))).collect();
        SuiteReport {
            schema: SCHEMA,
            aggregate: Aggregate::of(&self.cases),
            suite: self.suite,
            pass,
            seed: self.seed,
            prng: crate::family::PRNG,
            settings: self.settings,
            tolerances: self.tolerances,
            checks: self.checks,
            groups,
            cases: self.cases,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        }
    }
}

/// Top-level document written by `verify` and `experiment`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub pass: bool,
    pub seed: u64,
    pub prng: &'static str,
    pub suites: Vec<SuiteReport>,
}

impl RunReport {
    pub fn new(command: &str, seed: u64, suites: Vec<SuiteReport>) -> Self {
        Self { schema: SCHEMA, command: command.to_string(), pass: suites.iter().all(|s| s.pass), seed, prng: crate::family::PRNG, suites }
    }

    pub fn write_json<W: Write>(&self, w: W) -> serde_json::Result<()> {
        serde_json::to_writer_pretty(w, self)
    }

    /// One row per case plus one per check.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["suite", "kind", "group", "index", "digest", "inputs", "lhs", "rhs", "ratio", "margin", "pass"])?;
        for s in &self.suites {
            for c in &s.checks {
                out.write_record([
                    s.suite.as_str(),
                    "check",
                    c.name.as_str(),
                    "",
                    "",
                    c.detail.as_str(),
                    &fmt_num(c.value.0),
                    &fmt_num(c.bound.0),
                    "",
                    "",
                    if c.pass { "true" } else { "false" },
                ])?;
            }
            for c in &s.cases {
                out.write_record([
                    s.suite.as_str(),
                    "case",
                    c.group.as_str(),
                    &c.index.to_string(),
                    c.digest.as_str(),
                    c.inputs.as_str(),
                    &fmt_num(c.lhs.0),
                    &fmt_num(c.rhs.0),
                    &fmt_num(c.ratio.0),
                    &fmt_num(c.margin.0),
                    if c.pass { "true" } else { "false" },
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_numbers_become_strings() {
        let v = serde_json::to_value([Num(1.5), Num(f64::INFINITY), Num(f64::NAN)]).unwrap();
        assert_eq!(v, serde_json::json!([1.5, "inf", "nan"]));
    }

    #[test]
    fn aggregate_median_and_worst_margin() {
        let cases: Vec<CaseRecord> =
            [(1.0, 2.0), (3.0, 2.0), (1.0, 4.0)].iter().map(|&(l, r)| CaseRecord::new("g", format!("{l},{r}"), l, r, l <= r)).collect();
        let a = Aggregate::of(&cases);
        assert_eq!(a.median_ratio, Num(0.5));
        assert_eq!(a.max_ratio, Num(1.5));
        assert_eq!(a.worst_margin, Num(-1.0));
    }
}
