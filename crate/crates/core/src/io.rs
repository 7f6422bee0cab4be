//! CSV time series and binary snapshots.
//!
//! Fluid snapshot layout (little endian):
//! magic `PENS1\0`, `u32` d, `u32` N per axis, `f64` L per axis, `f64` t,
//! then `rho`, `m[0..d)`, `v[0..d)` as row-major `f64` arrays.
//!
//! Kinetic snapshot layout: magic `PENSK\0`, `u32` Nx, `u32` Nxi, `f64` L,
//! `f64` Xi, `f64` eps, `f64` t, then `f` with `xi` varying fastest.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::coupler::FluidState;
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{PensError, Result};
use crate::grid::{Grid, ScalarField};
use crate::spectral::Transform;

pub const FLUID_MAGIC: &[u8; 6] = b"PENS1\0";
pub const KINETIC_MAGIC: &[u8; 6] = b"PENSK\0";

/// Columns written as integers rather than 17-digit floats.
const INTEGER_COLUMNS: &[&str] = &["step", "clipped"];

fn format_value(column: &str, x: f64) -> String {
    if INTEGER_COLUMNS.contains(&column) {
        format!("{}", x as u64)
    } else {
        format!("{x:.16e}")
    }
}

/// CSV bytes for `records` under `header`; records must match the header and
/// be sorted by time.
pub fn timeseries_csv(header: &[String], records: &[DiagnosticsRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| PensError::InvalidArgument(format!("CSV encoding failed: {e}"));
    w.write_record(header).map_err(csv_err)?;
    let mut last_t = f64::NEG_INFINITY;
    for r in records {
        if r.header() != header {
            return Err(PensError::InvalidArgument(format!(
                "record at t = {} does not match the CSV header",
                r.t
            )));
        }
        if r.t < last_t {
            return Err(PensError::InvalidArgument(format!(
                "records not sorted by time: {} after {last_t}",
                r.t
            )));
        }
        last_t = r.t;
        let row: Vec<String> = header.iter().zip(r.values()).map(|(h, x)| format_value(h, x)).collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| PensError::InvalidArgument(format!("CSV encoding failed: {e}")))
}

pub fn write_timeseries(path: &Path, header: &[String], records: &[DiagnosticsRecord]) -> Result<()> {
    let bytes = timeseries_csv(header, records)?;
    write_file(path, |w| w.write_all(&bytes))
}

/// A parsed time series: column names and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// `(t, column)` pairs.
    pub fn series(&self, name: &str) -> Option<Vec<(f64, f64)>> {
        let t = self.column("t")?;
        let y = self.column(name)?;
        Some(t.into_iter().zip(y).collect())
    }
}

/// CSV bytes for a free-form table; rows must match the header width.
pub fn table_csv(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| PensError::InvalidArgument(format!("CSV encoding failed: {e}"));
    w.write_record(&table.header).map_err(csv_err)?;
    for (i, r) in table.rows.iter().enumerate() {
        if r.len() != table.header.len() {
            return Err(PensError::InvalidArgument(format!(
                "row {} has {} values for {} columns",
                i + 1,
                r.len(),
                table.header.len()
            )));
        }
        let row: Vec<String> = table.header.iter().zip(r).map(|(h, &x)| format_value(h, x)).collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| PensError::InvalidArgument(format!("CSV encoding failed: {e}")))
}

pub fn write_table(path: &Path, table: &Table) -> Result<()> {
    let bytes = table_csv(table)?;
    write_file(path, |w| w.write_all(&bytes))
}

pub fn read_timeseries(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| PensError::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let bad = |detail: String| PensError::InvalidArgument(format!("{}: {detail}", path.display()));
    let header: Vec<String> = r
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| bad(format!("row {}: {s:?} is not a number", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Creates `path`, runs `body` on a buffered writer and flushes; on any
/// failure the partial file is removed.
pub(crate) fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| PensError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let outcome = body(&mut w).and_then(|_| w.flush()).and_then(|_| w.get_ref().sync_all());
    match outcome {
        Ok(()) => Ok(()),
        Err(e) => {
            drop(w);
            let _ = std::fs::remove_file(path);
            Err(PensError::io(path, e))
        }
    }
}

/// Physical-space fields of a fluid state.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: Grid,
    pub t: f64,
    pub rho: Vec<f64>,
    pub momentum: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn from_state(transform: &Transform, state: &FluidState) -> Self {
        let v = state.ns.velocity(transform);
        Self {
            grid: *state.euler.rho.grid(),
            t: state.t,
            rho: state.euler.rho.data().to_vec(),
            momentum: state.euler.momentum.components().iter().map(|c| c.data().to_vec()).collect(),
            v: v.components().iter().map(|c| c.data().to_vec()).collect(),
        }
    }

    pub fn rho_field(&self) -> ScalarField {
        ScalarField::from_vec(self.grid, self.rho.clone()).expect("snapshot arrays match the grid")
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let d = self.grid.dim();
        let mut out = Vec::with_capacity(6 + 4 + 12 * d + 8 + 8 * self.grid.len() * (1 + 2 * d));
        out.extend_from_slice(FLUID_MAGIC);
        out.extend_from_slice(&(d as u32).to_le_bytes());
        for _ in 0..d {
            out.extend_from_slice(&(self.grid.n() as u32).to_le_bytes());
        }
        for _ in 0..d {
            out.extend_from_slice(&self.grid.length().to_le_bytes());
        }
        out.extend_from_slice(&self.t.to_le_bytes());
        for field in std::iter::once(&self.rho).chain(&self.momentum).chain(&self.v) {
            for x in field {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        r.magic(FLUID_MAGIC)?;
        let d = r.u32()? as usize;
        if !(1..=3).contains(&d) {
            return Err(r.error(4, format!("dimension {d} outside 1..=3")));
        }
        let ns: Vec<u32> = (0..d).map(|_| r.u32()).collect::<Result<_>>()?;
        let ls: Vec<f64> = (0..d).map(|_| r.f64()).collect::<Result<_>>()?;
        if ns.iter().any(|n| *n != ns[0]) || ls.iter().any(|l| *l != ls[0]) {
            return Err(r.error(0, "only cubic grids are supported".into()));
        }
        let grid = Grid::new(d, ns[0] as usize, ls[0]).map_err(|e| r.error(0, e.to_string()))?;
        let t = r.f64()?;
        let len = grid.len();
        let rho = r.f64s(len)?;
        let momentum = (0..d).map(|_| r.f64s(len)).collect::<Result<Vec<_>>>()?;
        let v = (0..d).map(|_| r.f64s(len)).collect::<Result<Vec<_>>>()?;
        r.finish()?;
        Ok(Self {
            grid,
            t,
            rho,
            momentum,
            v,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes();
        write_file(path, |w| w.write_all(&bytes))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&read_all(path)?)
    }
}

/// Phase-space density of a kinetic run.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticSnapshot {
    pub nx: usize,
    pub nxi: usize,
    pub length: f64,
    pub xi_max: f64,
    pub epsilon: f64,
    pub t: f64,
    pub f: Vec<f64>,
}

impl KineticSnapshot {
    pub fn from_state(state: &crate::kinetic::KineticState) -> Self {
        Self {
            nx: state.grid.n(),
            nxi: state.vgrid.n,
            length: state.grid.length(),
            xi_max: state.vgrid.xi_max,
            epsilon: state.epsilon,
            t: state.t,
            f: state.data().to_vec(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(6 + 8 + 32 + 8 * self.f.len());
        out.extend_from_slice(KINETIC_MAGIC);
        out.extend_from_slice(&(self.nx as u32).to_le_bytes());
        out.extend_from_slice(&(self.nxi as u32).to_le_bytes());
        for x in [self.length, self.xi_max, self.epsilon, self.t] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        for x in &self.f {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        r.magic(KINETIC_MAGIC)?;
        let nx = r.u32()? as usize;
        let nxi = r.u32()? as usize;
        let (length, xi_max, epsilon, t) = (r.f64()?, r.f64()?, r.f64()?, r.f64()?);
        let f = r.f64s(nx * nxi)?;
        r.finish()?;
        Ok(Self {
            nx,
            nxi,
            length,
            xi_max,
            epsilon,
            t,
            f,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes();
        write_file(path, |w| w.write_all(&bytes))
    }
}

/// Either snapshot kind, chosen by magic.
#[derive(Debug, Clone, PartialEq)]
pub enum AnySnapshot {
    Fluid(Snapshot),
    Kinetic(KineticSnapshot),
}

pub fn load_any_snapshot(path: &Path) -> Result<AnySnapshot> {
    let bytes = read_all(path)?;
    if bytes.starts_with(KINETIC_MAGIC) {
        KineticSnapshot::from_bytes(&bytes).map(AnySnapshot::Kinetic)
    } else {
        Snapshot::from_bytes(&bytes).map(AnySnapshot::Fluid)
    }
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| PensError::io(path, e))?;
    Ok(bytes)
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> ByteReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, offset: 0 }
    }

    fn error(&self, back: usize, detail: String) -> PensError {
        PensError::Snapshot {
            offset: self.offset.saturating_sub(back),
            detail,
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.offset < n {
            return Err(PensError::Snapshot {
                offset: self.bytes.len(),
                detail: format!(
                    "truncated: needed {n} bytes at offset {}, file has {}",
                    self.offset,
                    self.bytes.len()
                ),
            });
        }
        let s = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(s)
    }

    fn magic(&mut self, expected: &[u8; 6]) -> Result<()> {
        let n = self.bytes.len().min(6);
        let found = &self.bytes[..n];
        if found != expected {
            return Err(PensError::Snapshot {
                offset: 0,
                detail: format!(
                    "bad magic: expected {:?}, found {:?}",
                    String::from_utf8_lossy(expected),
                    String::from_utf8_lossy(found)
                ),
            });
        }
        self.offset = 6;
        Ok(())
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(8 * n)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn finish(&self) -> Result<()> {
        if self.offset != self.bytes.len() {
            return Err(PensError::Snapshot {
                offset: self.offset,
                detail: format!("{} trailing bytes", self.bytes.len() - self.offset),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_write_removes_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("partial.bin");
        let err = write_file(&path, |w| {
            w.write_all(&[1, 2, 3])?;
            Err(std::io::Error::new(std::io::ErrorKind::WriteZero, "short write"))
        })
        .unwrap_err();
        assert!(matches!(err, PensError::Io { .. }));
        assert!(err.to_string().contains("partial.bin"));
        assert!(!path.exists());
    }
}
