//! Grid function files.
//!
//! CSV: one row per node, `x,value` for `n = 1` and `x,y,value` for `n = 2`,
//! in any order, with an optional header. Nodes must sit exactly on a grid
//! `x = -L + i h` with `h = 2L/N`, every node present once.
//!
//! Binary (`OGF1`), little endian:
//!
//! | bytes  | content                         |
//! |--------|---------------------------------|
//! | 0..4   | magic `OGF1`                    |
//! | 4..8   | zero                            |
//! | 8..16  | `n` as u64                      |
//! | 16..24 | `N` as u64                      |
//! | 24..32 | `L` as f64                      |
//! | 32..   | `N^n` values as f64, axis 0 fastest |

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::grid::{GridError, GridFunction};

pub const MAGIC: &[u8; 4] = b"OGF1";
const HEADER: usize = 32;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {msg}")]
    Row { line: usize, msg: String },
    #[error("nodes are not grid aligned: {0}")]
    Alignment(String),
    #[error("bad binary header: {0}")]
    Header(&'static str),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Relative tolerance, in cells, for matching CSV coordinates to nodes.
const ALIGN_TOL: f64 = 1e-9;

pub fn read_csv<R: Read>(reader: R) -> Result<GridFunction<f64>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(r) => r,
            Err(_) if i == 0 => continue,
            Err(_) => return Err(IoError::Row { line: i + 1, msg: "not a number".into() }),
        };
        if !(2..=3).contains(&row.len()) {
            return Err(IoError::Row { line: i + 1, msg: "expected 2 or 3 columns".into() });
        }
        if *width.get_or_insert(row.len()) != row.len() {
            return Err(IoError::Row { line: i + 1, msg: "column count changed".into() });
        }
        rows.push(row);
    }
    let n = width.ok_or(IoError::Alignment("no rows".into()))? - 1;
    let coords: Vec<f64> = rows.iter().flat_map(|r| r[..n].iter().copied()).collect();
    let lo = coords.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = coords.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let points = (rows.len() as f64).powf(1.0 / n as f64).round() as usize;
    if points < 2 || points.pow(n as u32) != rows.len() {
        return Err(IoError::Alignment(format!("{} rows do not form a square grid", rows.len())));
    }
    // Nodes run over [-L, L - h], so hi - lo = 2L (N - 1) / N.
    let half_width = (hi - lo) * points as f64 / (2.0 * (points as f64 - 1.0));
    if ((lo + half_width) / half_width).abs() > ALIGN_TOL {
        return Err(IoError::Alignment(format!("box is not symmetric: first node {lo}, last {hi}")));
    }
    let h = 2.0 * half_width / points as f64;
    let mut values = vec![f64::NAN; rows.len()];
    for (line, row) in rows.iter().enumerate() {
        let mut flat = 0;
        let mut stride = 1;
        for &x in &row[..n] {
            let pos = (x + half_width) / h;
            let i = pos.round();
            if (pos - i).abs() > ALIGN_TOL * points as f64 || i < 0.0 || i >= points as f64 {
                return Err(IoError::Alignment(format!("row {} at {x} is off the grid", line + 1)));
            }
            flat += i as usize * stride;
            stride *= points;
        }
        if !values[flat].is_nan() {
            return Err(IoError::Alignment(format!("row {} repeats a node", line + 1)));
        }
        values[flat] = row[n];
    }
    Ok(GridFunction::new(n, points, half_width, values)?)
}

pub fn write_csv<W: Write>(u: &GridFunction<f64>, writer: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    if u.n() == 1 {
        w.write_record(["x", "value"])?;
    } else {
        w.write_record(["x", "y", "value"])?;
    }
    for (flat, v) in u.values().iter().enumerate() {
        let idx = u.index(flat);
        let mut rec: Vec<String> = (0..u.n()).map(|a| format!("{:e}", u.coord(idx[a]))).collect();
        rec.push(format!("{v:e}"));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut reader: R) -> Result<GridFunction<f64>, IoError> {
    let mut header = [0u8; HEADER];
    reader.read_exact(&mut header)?;
    if &header[0..4] != MAGIC {
        return Err(IoError::Header("magic is not OGF1"));
    }
    let word = |i: usize| -> [u8; 8] { header[i..i + 8].try_into().unwrap() };
    let n = u64::from_le_bytes(word(8)) as usize;
    let points = u64::from_le_bytes(word(16)) as usize;
    let half_width = f64::from_le_bytes(word(24));
    if !(1..=2).contains(&n) || points > 1 << 20 {
        return Err(IoError::Header("dimension or size out of range"));
    }
    let count = points.pow(n as u32);
    let mut bytes = vec![0u8; 8 * count];
    reader.read_exact(&mut bytes)?;
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(GridFunction::new(n, points, half_width, values)?)
}

pub fn write_binary<W: Write>(u: &GridFunction<f64>, mut writer: W) -> Result<(), IoError> {
    let mut header = [0u8; HEADER];
    header[0..4].copy_from_slice(MAGIC);
    header[8..16].copy_from_slice(&(u.n() as u64).to_le_bytes());
    header[16..24].copy_from_slice(&(u.points() as u64).to_le_bytes());
    header[24..32].copy_from_slice(&u.half_width().to_le_bytes());
    writer.write_all(&header)?;
    for v in u.values() {
        writer.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads either format, deciding by the magic bytes.
pub fn load(path: &Path) -> Result<GridFunction<f64>, IoError> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        read_binary(bytes.as_slice())
    } else {
        read_csv(bytes.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> GridFunction<f64> {
        GridFunction::from_fn(n, 8, 2.0, |x| x[0] - 0.5 * x.get(1).copied().unwrap_or(0.0) + 0.1).unwrap()
    }

    #[test]
    fn csv_round_trip() {
        for n in [1, 2] {
            let u = sample(n);
            let mut buf = Vec::new();
            write_csv(&u, &mut buf).unwrap();
            assert_eq!(read_csv(buf.as_slice()).unwrap(), u);
        }
    }

    #[test]
    fn binary_round_trip_and_layout() {
        let u = sample(2);
        let mut buf = Vec::new();
        write_binary(&u, &mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 8 * 64);
        assert_eq!(&buf[0..4], b"OGF1");
        assert_eq!(u64::from_le_bytes(buf[16..24].try_into().unwrap()), 8);
        assert_eq!(read_binary(buf.as_slice()).unwrap(), u);
        assert!(read_binary(&b"OGF2"[..]).is_err());
    }

    #[test]
    fn csv_rejects_misaligned_nodes() {
        let text = "x,value\n-1,0\n-0.5,1\n0.1,2\n0.5,3\n";
        assert!(matches!(read_csv(text.as_bytes()), Err(IoError::Alignment(_))));
        let dup = "-1,0\n-0.5,1\n-0.5,2\n0.5,3\n";
        assert!(read_csv(dup.as_bytes()).is_err());
    }
}
