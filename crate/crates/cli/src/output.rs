//! Writers for CSV reports, binary field files and JSON manifests.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use qthermo::space::{Boundary, Grid};

use crate::CliError;

/// Magic prefix of binary field files.
pub const FIELD_MAGIC: &[u8; 8] = b"QTFIELD1";

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Value formatting shared by all CSV columns.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

/// Collects the files written by one command.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| io_err(root, e))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.root.join(name)
    }

    pub fn csv<R, I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        w.write_record(header).map_err(|e| io_err(&path, e))?;
        for row in rows {
            let row: Vec<String> = row.into_iter().collect();
            w.write_record(&row).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.path(name);
        write_json(&path, value)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.path(name);
        std::fs::write(&path, body).map_err(|e| io_err(&path, e))
    }

    pub fn field(&mut self, name: &str, grid: &Grid, values: &[f64]) -> Result<(), CliError> {
        let path = self.path(name);
        write_field(&path, grid, values)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut body = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    body.push('\n');
    std::fs::write(path, body).map_err(|e| io_err(path, e))
}

/// `QTFIELD1`, grid size as little-endian u64, boundary byte
/// (0 periodic, 1 clamped), then the values as little-endian f64.
pub fn write_field(path: &Path, grid: &Grid, values: &[f64]) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(f);
    let boundary: u8 = match grid.boundary {
        Boundary::Periodic => 0,
        Boundary::Clamped => 1,
    };
    w.write_all(FIELD_MAGIC).map_err(|e| io_err(path, e))?;
    w.write_all(&(values.len() as u64).to_le_bytes()).map_err(|e| io_err(path, e))?;
    w.write_all(&[boundary]).map_err(|e| io_err(path, e))?;
    for v in values {
        w.write_all(&v.to_le_bytes()).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Inverse of [`write_field`].
pub fn read_field(path: &Path) -> Result<(Boundary, Vec<f64>), CliError> {
    let mut bytes = Vec::new();
    File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(|e| io_err(path, e))?;
    if bytes.len() < 17 || &bytes[..8] != FIELD_MAGIC {
        return Err(io_err(path, "not a field file"));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().expect("eight bytes")) as usize;
    let boundary = match bytes[16] {
        0 => Boundary::Periodic,
        1 => Boundary::Clamped,
        b => return Err(io_err(path, format!("unknown boundary byte {b}"))),
    };
    let body = &bytes[17..];
    if body.len() != 8 * n {
        return Err(io_err(path, format!("expected {n} values, found {} bytes", body.len())));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes"))).collect();
    Ok((boundary, values))
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub started: String,
    pub elapsed_s: f64,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub command: String,
    pub kind: &'static str,
    pub message: String,
    pub details: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new(5, Boundary::Clamped).unwrap();
        let values = vec![1.0, -2.5, 3.25, f64::MIN_POSITIVE, 0.1];
        let path = dir.path().join("h.qtf");
        write_field(&path, &grid, &values).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..8], b"QTFIELD1");
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 5);
        assert_eq!(bytes[16], 1);
        assert_eq!(read_field(&path).unwrap(), (Boundary::Clamped, values));
    }

    #[test]
    fn floats_format_round_trip() {
        for v in [0.1, -3.5e-17, 1e300, 2f64.ln()] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.csv("c.csv", &["n", "C"], (1..=2).map(|n| vec![n.to_string(), fmt_f64(0.5)])).unwrap();
        let body = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
        assert_eq!(body, "n,C\n1,5e-1\n2,5e-1\n");
        assert_eq!(out.written(), ["c.csv"]);
    }
}
