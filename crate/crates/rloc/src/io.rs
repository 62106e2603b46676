//! CSV tables, the binary path dump and JSON artifacts.
//!
//! Binary path layout ("RLSP", version 1, little-endian throughout):
//!
//! | bytes | content |
//! |---|---|
//! | 4 | magic `RLSP` |
//! | 1 | version |
//! | 8 | point count n (u64) |
//! | 8 | α (f64) |
//! | 8 | seed (u64) |
//! | 8 | jump threshold (f64) |
//! | 8 | jump count m (u64) |
//! | 8n | times |
//! | 8n | values |
//! | 24m | jumps: time (f64), size (f64), step (u64) |

use std::fs;
use std::path::Path;

use rloc_core::{Alpha, Jump, SamplePath};
use serde::Serialize;

use crate::config::Config;
use crate::error::CliError;

pub const MAGIC: &[u8; 4] = b"RLSP";
pub const VERSION: u8 = 1;

/// Writes `# key: value` header lines (schema and the resolved config as
/// one-line JSON), a column header and the rows.
pub fn write_csv(path: &Path, config: &Config, columns: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    fs::write(path, csv_string(config, columns, rows)).map_err(|e| io_err(path, e))
}

pub fn csv_string(config: &Config, columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = String::new();
    s.push_str(&format!("# schema: {}\n", config.schema));
    s.push_str(&format!("# config: {}\n", serde_json::to_string(config).expect("config serialises")));
    s.push_str(&columns.join(","));
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Reads the first two numeric columns. Lines starting with `#` and a
/// non-numeric first line are skipped.
pub fn read_xy_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_xy_csv(&text).map_err(|m| CliError::Schema(format!("{}: {m}", path.display())))
}

pub fn parse_xy_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut first = true;
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<(f64, f64)> = if cells.len() >= 2 {
            cells[0].parse().ok().zip(cells[1].parse().ok())
        } else {
            None
        };
        match parsed {
            Some((x, y)) => {
                xs.push(x);
                ys.push(y);
            }
            None if first => {}
            None => return Err(format!("line {}: expected two numbers", ln + 1)),
        }
        first = false;
    }
    if xs.len() < 2 {
        return Err("need at least two rows".into());
    }
    Ok((xs, ys))
}

pub fn encode_path(p: &SamplePath) -> Vec<u8> {
    let n = p.values.len();
    let mut b = Vec::with_capacity(45 + 16 * n + 24 * p.jumps.len());
    b.extend_from_slice(MAGIC);
    b.push(VERSION);
    b.extend_from_slice(&(n as u64).to_le_bytes());
    b.extend_from_slice(&p.alpha.value().to_le_bytes());
    b.extend_from_slice(&p.seed.to_le_bytes());
    b.extend_from_slice(&p.jump_threshold.to_le_bytes());
    b.extend_from_slice(&(p.jumps.len() as u64).to_le_bytes());
    for t in &p.times {
        b.extend_from_slice(&t.to_le_bytes());
    }
    for v in &p.values {
        b.extend_from_slice(&v.to_le_bytes());
    }
    for j in &p.jumps {
        b.extend_from_slice(&j.time.to_le_bytes());
        b.extend_from_slice(&j.size.to_le_bytes());
        b.extend_from_slice(&(j.step as u64).to_le_bytes());
    }
    b
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], CliError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| CliError::Schema("truncated RLSP file".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64, CliError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CliError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_path(buf: &[u8]) -> Result<SamplePath, CliError> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(CliError::Schema("not an RLSP file".into()));
    }
    let v = r.take(1)?[0];
    if v != VERSION {
        return Err(CliError::Schema(format!("unsupported RLSP version {v}")));
    }
    let n = r.u64()? as usize;
    let alpha = Alpha::new(r.f64()?)?;
    let seed = r.u64()?;
    let jump_threshold = r.f64()?;
    let m = r.u64()? as usize;
    let need = n.checked_mul(16).and_then(|a| m.checked_mul(24).and_then(|b| a.checked_add(b)));
    if need != Some(buf.len() - r.pos) {
        return Err(CliError::Schema("RLSP length does not match its header".into()));
    }
    let times = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let values = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let mut jumps = Vec::with_capacity(m);
    for _ in 0..m {
        let time = r.f64()?;
        let size = r.f64()?;
        let step = r.u64()? as usize;
        jumps.push(Jump { time, size, step });
    }
    Ok(SamplePath { times, values, jumps, alpha, seed, jump_threshold })
}

pub fn write_path_binary(path: &Path, p: &SamplePath) -> Result<(), CliError> {
    fs::write(path, encode_path(p)).map_err(|e| io_err(path, e))
}

pub fn read_path_binary(path: &Path) -> Result<SamplePath, CliError> {
    let buf = fs::read(path).map_err(|e| io_err(path, e))?;
    decode_path(&buf)
}

/// A JSON artifact: schema, resolved config and the payload.
#[derive(Serialize)]
pub struct Artifact<'a, T: Serialize> {
    pub schema: &'a str,
    pub config: &'a Config,
    pub result: &'a T,
}

pub fn json_string<T: Serialize>(config: &Config, result: &T) -> Result<String, CliError> {
    let a = Artifact { schema: &config.schema, config, result };
    let mut s = serde_json::to_string_pretty(&a).map_err(|e| CliError::Convergence(format!("non-finite result: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, config: &Config, result: &T) -> Result<(), CliError> {
    fs::write(path, json_string(config, result)?).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rloc_core::stable_process::simulate_path;

    #[test]
    fn binary_round_trip() {
        let p = simulate_path(Alpha::new(1.4).unwrap(), 2.0, 500, 0.05, 17).unwrap();
        assert!(!p.jumps.is_empty());
        let b = encode_path(&p);
        assert_eq!(&b[..4], b"RLSP");
        assert_eq!(b[4], 1);
        assert_eq!(decode_path(&b).unwrap(), p);
        assert!(decode_path(&b[..b.len() - 1]).is_err());
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(decode_path(&bad).is_err());
    }

    #[test]
    fn csv_parsing() {
        let (x, y) = parse_xy_csv("# c\nx,L\n0,1\n1,2.5e0\n").unwrap();
        assert_eq!((x, y), (vec![0.0, 1.0], vec![1.0, 2.5]));
        assert!(parse_xy_csv("0,1\nfoo,2\n").is_err());
        assert!(parse_xy_csv("0,1\n").is_err());
    }
}
