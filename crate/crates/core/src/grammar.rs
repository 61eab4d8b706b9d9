//! Text form of Young functions.
//!
//! ```text
//! power(p)              t^p
//! powerlog(p, alpha)    t^p ln(e + t)^alpha
//! powerlog0(p, alpha)   t^p ln(e + 1/t)^alpha
//! exp()                 e^t - 1 - t
//! linf(b)               0 on [0, b], +inf beyond
//! spliced(zero=<spec>, inf=<spec>, at=<t>)
//! table(<path>)         two-column CSV `t,a(t)` of density values
//! ```
//!
//! In a table the density is linear between rows and constant after the last
//! one. The first row must be at `t = 0`. A repeated `t` encodes a jump: the
//! first value is the left limit, the last one the value to the right.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::scalar::Real;
use crate::young::{Branch, Tabulated, YoungError, YoungFunction};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown function {0:?}")]
    Unknown(String),
    #[error("{name}: expected {expected}")]
    Arity { name: String, expected: &'static str },
    #[error("cannot read table {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("table {path}, line {line}: {msg}")]
    Table { path: PathBuf, line: usize, msg: String },
    #[error(transparent)]
    Young(#[from] YoungError),
}

/// Parses a Young function; relative table paths are resolved against
/// `base` when given.
pub fn parse_young<T: Real>(spec: &str, base: Option<&Path>) -> Result<YoungFunction<T>, SpecError> {
    let mut p = Parser { src: spec, pos: 0, base };
    let f = p.young()?;
    p.skip_ws();
    if p.pos != spec.len() {
        return Err(p.error("trailing input"));
    }
    Ok(f)
}

/// A parsed `name(args)` call with positional and keyword arguments, used
/// for function families that share this syntax.
#[derive(Debug, Clone, PartialEq)]
pub struct Call {
    pub name: String,
    pub positional: Vec<f64>,
    pub keywords: Vec<(String, f64)>,
}

impl Call {
    pub fn keyword(&self, key: &str) -> Option<f64> {
        self.keywords.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// Parses `name(a, b, key=c)` with numeric arguments only.
pub fn parse_call(spec: &str) -> Result<Call, SpecError> {
    let mut p = Parser { src: spec, pos: 0, base: None };
    let name = p.ident()?;
    p.expect('(')?;
    let mut call = Call { name, positional: Vec::new(), keywords: Vec::new() };
    p.skip_ws();
    if !p.eat(')') {
        loop {
            let save = p.pos;
            match p.ident().ok() {
                Some(key) if p.eat('=') => call.keywords.push((key, p.number()?)),
                _ => {
                    p.pos = save;
                    call.positional.push(p.number()?);
                }
            }
            if p.eat(')') {
                break;
            }
            p.expect(',')?;
        }
    }
    p.skip_ws();
    if p.pos != spec.len() {
        return Err(p.error("trailing input"));
    }
    Ok(call)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    base: Option<&'a Path>,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: &str) -> SpecError {
        SpecError::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SpecError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {c:?}")))
        }
    }

    fn ident(&mut self) -> Result<String, SpecError> {
        self.skip_ws();
        let len = self.rest().find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(self.rest().len());
        if len == 0 || !self.rest().starts_with(|c: char| c.is_ascii_alphabetic()) {
            return Err(self.error("expected a name"));
        }
        let name = self.rest()[..len].to_string();
        self.pos += len;
        Ok(name)
    }

    fn number(&mut self) -> Result<f64, SpecError> {
        self.skip_ws();
        let len = self.rest().find(|c: char| !(c.is_ascii_alphanumeric() || matches!(c, '.' | '+' | '-'))).unwrap_or(self.rest().len());
        let text = &self.rest()[..len];
        let value = match text {
            "inf" => Some(f64::INFINITY),
            "e" => Some(std::f64::consts::E),
            _ => text.parse::<f64>().ok(),
        };
        match value {
            Some(v) => {
                self.pos += len;
                Ok(v)
            }
            None => Err(self.error("expected a number")),
        }
    }

    fn numbers(&mut self, name: &str, count: usize, expected: &'static str) -> Result<Vec<f64>, SpecError> {
        let mut out = Vec::new();
        if !self.eat(')') {
            loop {
                out.push(self.number()?);
                if self.eat(')') {
                    break;
                }
                self.expect(',')?;
            }
        }
        if out.len() != count {
            return Err(SpecError::Arity { name: name.to_string(), expected });
        }
        Ok(out)
    }

    fn young<T: Real>(&mut self) -> Result<YoungFunction<T>, SpecError> {
        Ok(match self.branch()? {
            Branch::Power(p) => YoungFunction::power(p)?,
            Branch::PowerLog(p, a) => YoungFunction::power_log(p, a)?,
            Branch::PowerLogZero(p, a) => YoungFunction::power_log_zero(p, a)?,
            Branch::Exp => YoungFunction::exp(),
            Branch::Young(f) => f,
        })
    }

    fn branch<T: Real>(&mut self) -> Result<Branch<T>, SpecError> {
        let start = self.pos;
        let name = self.ident()?;
        self.expect('(')?;
        let t = T::lit;
        Ok(match name.as_str() {
            "power" => Branch::Power(t(self.numbers(&name, 1, "one exponent")?[0])),
            "powerlog" => {
                let v = self.numbers(&name, 2, "exponent and log power")?;
                Branch::PowerLog(t(v[0]), t(v[1]))
            }
            "powerlog0" => {
                let v = self.numbers(&name, 2, "exponent and log power")?;
                Branch::PowerLogZero(t(v[0]), t(v[1]))
            }
            "exp" => {
                self.numbers(&name, 0, "no arguments")?;
                Branch::Exp
            }
            "linf" => Branch::Young(YoungFunction::linf_gauge(t(self.numbers(&name, 1, "one threshold")?[0]))?),
            "spliced" => Branch::Young(self.spliced()?),
            "table" => {
                let close = self.rest().find(')').ok_or_else(|| self.error("unterminated table path"))?;
                let raw = self.rest()[..close].trim().trim_matches('"').to_string();
                self.pos += close + 1;
                let path = match self.base {
                    Some(b) if Path::new(&raw).is_relative() => b.join(&raw),
                    _ => PathBuf::from(&raw),
                };
                Branch::Young(YoungFunction::tabulated(read_table(&path)?))
            }
            _ => {
                self.pos = start;
                return Err(SpecError::Unknown(name));
            }
        })
    }

    fn spliced<T: Real>(&mut self) -> Result<YoungFunction<T>, SpecError> {
        let (mut zero, mut inf, mut at) = (None, None, None);
        loop {
            let key = self.ident()?;
            self.expect('=')?;
            match key.as_str() {
                "zero" => zero = Some(self.branch()?),
                "inf" => inf = Some(self.branch()?),
                "at" => at = Some(T::lit(self.number()?)),
                _ => return Err(self.error("spliced takes zero=, inf= and at=")),
            }
            if self.eat(')') {
                break;
            }
            self.expect(',')?;
        }
        match (zero, inf, at) {
            (Some(z), Some(i), Some(a)) => Ok(YoungFunction::spliced(z, i, a)?),
            _ => Err(SpecError::Arity { name: "spliced".into(), expected: "zero=, inf= and at=" }),
        }
    }
}

/// Reads a density table; see the module documentation for the format. A
/// first line that does not parse as numbers is taken as a header.
pub fn read_table<T: Real>(path: &Path) -> Result<Tabulated<T>, SpecError> {
    let err = |line: usize, msg: &str| SpecError::Table { path: path.to_path_buf(), line, msg: msg.to_string() };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| SpecError::Io { path: path.to_path_buf(), source: e.into() })?;
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| err(i + 1, &e.to_string()))?;
        if record.len() != 2 {
            return Err(err(i + 1, "expected two columns"));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(t), Ok(a)) => rows.push((t, a)),
            _ if i == 0 => continue,
            _ => return Err(err(i + 1, "not a number")),
        }
    }
    if rows.is_empty() || rows[0].0 != 0.0 {
        return Err(err(1, "the first row must be at t = 0"));
    }
    let mut knots = Vec::new();
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for (i, &(t, a)) in rows.iter().enumerate() {
        if i > 0 && t < rows[i - 1].0 {
            return Err(err(i + 1, "t must be non-decreasing"));
        }
        match knots.last() {
            Some(&last) if t == last => {
                // Jump: the later value holds to the right.
                *lo.last_mut().unwrap() = a;
            }
            _ => {
                if !knots.is_empty() {
                    hi.push(a);
                }
                knots.push(t);
                lo.push(a);
            }
        }
    }
    let lit = |v: Vec<f64>| v.into_iter().map(T::lit).collect::<Vec<T>>();
    Ok(Tabulated::new(lit(knots), lit(lo), lit(hi), T::zero(), None)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_closed_form() {
        let f: YoungFunction<f64> = parse_young("power(2)", None).unwrap();
        assert_eq!(f.eval(3.0), 9.0);
        let g: YoungFunction<f64> = parse_young(" powerlog( 2 , 1 ) ", None).unwrap();
        assert!((g.eval(1.0) - (std::f64::consts::E + 1.0).ln()).abs() < 1e-15);
        let h: YoungFunction<f64> = parse_young("linf(2)", None).unwrap();
        assert!(h.eval(3.0).is_infinite());
        assert!(parse_young::<f64>("exp()", None).is_ok());
        assert!(parse_young::<f64>("powerlog0(1.5,0.5)", None).is_ok());
    }

    #[test]
    fn parses_nested_splice() {
        let f: YoungFunction<f64> = parse_young("spliced(zero=power(2), inf=exp(), at=1)", None).unwrap();
        assert_eq!(f.eval(0.5), 0.25);
        let c = 1.0 / (std::f64::consts::E - 2.0);
        assert!((f.eval(2.0) - c * (2f64.exp() - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_young::<f64>("power(2", None), Err(SpecError::Syntax { .. })));
        assert!(matches!(parse_young::<f64>("cube(2)", None), Err(SpecError::Unknown(_))));
        assert!(matches!(parse_young::<f64>("power(1,2)", None), Err(SpecError::Arity { .. })));
        assert!(matches!(parse_young::<f64>("power(0.5)", None), Err(SpecError::Young(_))));
        assert!(parse_young::<f64>("power(2) x", None).is_err());
    }

    #[test]
    fn table_round_trip_matches_quadratic() {
        let dir = std::env::temp_dir().join(format!("orlicz-table-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("a.csv"), "t,a\n0,0\n1,1\n2,2\n").unwrap();
        let f: YoungFunction<f64> = parse_young("table(a.csv)", Some(&dir)).unwrap();
        // Density t on [0, 2], then constant 2.
        assert_eq!(f.eval(1.0), 0.5);
        assert_eq!(f.eval(3.0), 2.0 + 2.0);
        std::fs::write(dir.join("jump.csv"), "0,0\n1,1\n1,3\n").unwrap();
        let g: YoungFunction<f64> = parse_young("table(jump.csv)", Some(&dir)).unwrap();
        assert_eq!(g.density(1.0), 1.0);
        assert_eq!(g.density_right(1.0), 3.0);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn generic_calls() {
        let c = parse_call("gaussian(0, 1.5, seed=3)").unwrap();
        assert_eq!(c.name, "gaussian");
        assert_eq!(c.positional, vec![0.0, 1.5]);
        assert_eq!(c.keyword("seed"), Some(3.0));
        assert!(parse_call("bump()").unwrap().positional.is_empty());
    }
}
