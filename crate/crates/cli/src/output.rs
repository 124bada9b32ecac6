//! CSV files and the run manifest. Every file is written to a temporary
//! file in the output directory and renamed into place when complete.

use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

/// One CSV cell.
#[derive(Debug, Clone, Copy)]
pub enum Cell {
    F(f64),
    I(usize),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::I(i)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

struct Hashing<W> {
    inner: W,
    hash: Sha256,
}

impl<W: Write> Write for Hashing<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hash.update(&buf[..n]);
        Ok(n)
    }
    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// What the manifest records about a written file.
#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

pub struct CsvFile {
    out: BufWriter<Hashing<NamedTempFile>>,
    path: PathBuf,
    width: usize,
    rows: usize,
    line: String,
}

impl CsvFile {
    /// Starts `dir/name` with a header of `name [unit]` columns.
    pub fn create(dir: &Path, name: &str, columns: &[(String, &str)]) -> io::Result<Self> {
        let tmp = NamedTempFile::new_in(dir)?;
        let mut out = BufWriter::new(Hashing { inner: tmp, hash: Sha256::new() });
        let header: Vec<String> = columns.iter().map(|(c, u)| format!("{c} [{u}]")).collect();
        writeln!(out, "{}", header.join(","))?;
        Ok(Self { out, path: dir.join(name), width: columns.len(), rows: 0, line: String::new() })
    }

    pub fn row(&mut self, cells: &[Cell]) -> io::Result<()> {
        debug_assert_eq!(cells.len(), self.width, "{}", self.path.display());
        self.line.clear();
        for (k, c) in cells.iter().enumerate() {
            if k > 0 {
                self.line.push(',');
            }
            match *c {
                Cell::F(x) => self.line.push_str(&fmt_f64(x)),
                Cell::I(i) => self.line.push_str(&i.to_string()),
            }
        }
        self.line.push('\n');
        self.out.write_all(self.line.as_bytes())?;
        self.rows += 1;
        Ok(())
    }

    pub fn floats(&mut self, values: &[f64]) -> io::Result<()> {
        let cells: Vec<Cell> = values.iter().map(|&x| Cell::F(x)).collect();
        self.row(&cells)
    }

    /// Flushes and renames the file into place.
    pub fn commit(self) -> io::Result<OutputRecord> {
        let inner = self.out.into_inner().map_err(|e| e.into_error())?;
        let Hashing { inner: tmp, hash } = inner;
        tmp.as_file().sync_all()?;
        tmp.persist(&self.path).map_err(|e| e.error)?;
        Ok(OutputRecord { file: file_name(&self.path), rows: self.rows, sha256: hex::encode(hash.finalize()) })
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<OutputRecord> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    let rows = bytes.iter().filter(|&&b| b == b'\n').count();
    Ok(OutputRecord { file: file_name(path), rows, sha256: hex::encode(Sha256::digest(bytes)) })
}

/// Column names `prefix_x`, `prefix_y`, `prefix_z`.
pub fn xyz<'u>(prefix: &str, unit: &'u str) -> Vec<(String, &'u str)> {
    ["x", "y", "z"].iter().map(|a| (format!("{prefix}_{a}"), unit)).collect()
}

/// Row-major matrix entries `prefix_11` .. `prefix_33`.
pub fn matrix_columns<'u>(prefix: &str, unit: &'u str) -> Vec<(String, &'u str)> {
    (1..=3).flat_map(|i| (1..=3).map(move |j| (format!("{prefix}_{i}{j}"), unit))).collect()
}
