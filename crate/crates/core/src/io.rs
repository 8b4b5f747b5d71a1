//! On-disk formats.
//!
//! * Field container (`.nlsf`): magic `NLSF`, then little-endian `u32`
//!   version, `u32` dim, `u32` N, `u32` component count, `f64` L, followed by
//!   `components × N^dim` complex samples as little-endian `f32` pairs (the
//!   memory layout of numpy `complex64`). Real data are stored with zero
//!   imaginary parts; vector fields store one block per component.
//! * Phase-space container (`.nlsw`): magic `NLSW`, `u32` version, then
//!   `u32 N_x`, `f64 L_x`, `u32 N_ξ`, `f64 L_ξ`, then the `ξ`-major samples
//!   as `f32` pairs.
//! * CSV tables with a header row, and pretty-printed JSON.
//!
//! Every writer goes through a temporary file and a rename, so readers never
//! see partially written output.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{structural, Result};
use crate::grid::{Field, Grid, RealField, VectorField};
use crate::wavepacket::PhaseSpaceField;
use crate::Complex64;

const FIELD_MAGIC: &[u8; 4] = b"NLSF";
const PHASE_MAGIC: &[u8; 4] = b"NLSW";
const VERSION: u32 = 1;

/// Writes `bytes` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// A header plus rows of numbers, written with the shortest round-trip
/// decimal form of each value.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(structural(format!(
                "row of {} values for a table with {} columns",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| v.to_string()))?;
        }
        w.into_inner().map_err(|e| structural(format!("csv buffer: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_csv()?)
    }
}

fn push_samples(buf: &mut Vec<u8>, values: impl Iterator<Item = Complex64>) {
    for z in values {
        buf.extend_from_slice(&(z.re as f32).to_le_bytes());
        buf.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
}

fn encode(grid: &Grid, blocks: &[Vec<Complex64>]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(24 + 8 * grid.len() * blocks.len());
    buf.extend_from_slice(FIELD_MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
    buf.extend_from_slice(&(blocks.len() as u32).to_le_bytes());
    buf.extend_from_slice(&grid.box_length().to_le_bytes());
    for b in blocks {
        push_samples(&mut buf, b.iter().copied());
    }
    buf
}

pub fn encode_field(f: &Field) -> Vec<u8> {
    encode(f.grid(), &[f.values().to_vec()])
}

pub fn encode_real_field(f: &RealField) -> Vec<u8> {
    encode(f.grid(), &[f.values().iter().map(|x| Complex64::new(*x, 0.0)).collect()])
}

pub fn encode_vector_field(v: &VectorField) -> Vec<u8> {
    let blocks: Vec<Vec<Complex64>> = v
        .components()
        .iter()
        .map(|c| c.iter().map(|x| Complex64::new(*x, 0.0)).collect())
        .collect();
    encode(v.grid(), &blocks)
}

pub fn write_field(path: &Path, f: &Field) -> Result<()> {
    write_atomic(path, &encode_field(f))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(structural("container truncated"));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn samples(&mut self, count: usize) -> Result<Vec<Complex64>> {
        let raw = self.take(8 * count)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| {
                let re = f32::from_le_bytes(c[..4].try_into().expect("4 bytes"));
                let im = f32::from_le_bytes(c[4..].try_into().expect("4 bytes"));
                Complex64::new(f64::from(re), f64::from(im))
            })
            .collect())
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        if self.take(4)? != magic {
            return Err(structural("bad container magic"));
        }
        let v = self.u32()?;
        if v != VERSION {
            return Err(structural(format!("unsupported container version {v}")));
        }
        Ok(())
    }
}

/// Decodes a field container into its grid and component blocks.
pub fn decode(bytes: &[u8]) -> Result<(Grid, Vec<Vec<Complex64>>)> {
    let mut r = Reader { bytes, pos: 0 };
    r.header(FIELD_MAGIC)?;
    let dim = r.u32()? as usize;
    let n = r.u32()? as usize;
    let comps = r.u32()? as usize;
    let l = r.f64()?;
    let grid = Grid::new(dim, n, l)?;
    let blocks = (0..comps).map(|_| r.samples(grid.len())).collect::<Result<Vec<_>>>()?;
    if r.pos != bytes.len() {
        return Err(structural("trailing bytes after field container"));
    }
    Ok((grid, blocks))
}

pub fn read_field(path: &Path) -> Result<Field> {
    let (grid, mut blocks) = decode(&fs::read(path)?)?;
    if blocks.len() != 1 {
        return Err(structural(format!("expected one component, found {}", blocks.len())));
    }
    Field::new(grid, blocks.remove(0))
}

pub fn encode_phase_space(w: &PhaseSpaceField) -> Vec<u8> {
    let mut buf = Vec::with_capacity(32 + 8 * w.values.len());
    buf.extend_from_slice(PHASE_MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(w.x_grid.points_per_axis() as u32).to_le_bytes());
    buf.extend_from_slice(&w.x_grid.box_length().to_le_bytes());
    buf.extend_from_slice(&(w.xi_grid.points_per_axis() as u32).to_le_bytes());
    buf.extend_from_slice(&w.xi_grid.box_length().to_le_bytes());
    push_samples(&mut buf, w.values.iter().copied());
    buf
}

pub fn decode_phase_space(bytes: &[u8]) -> Result<PhaseSpaceField> {
    let mut r = Reader { bytes, pos: 0 };
    r.header(PHASE_MAGIC)?;
    let nx = r.u32()? as usize;
    let lx = r.f64()?;
    let nxi = r.u32()? as usize;
    let lxi = r.f64()?;
    let x_grid = Grid::new(1, nx, lx)?;
    let xi_grid = Grid::new(1, nxi, lxi)?;
    let values = r.samples(nx * nxi)?;
    if r.pos != bytes.len() {
        return Err(structural("trailing bytes after phase-space container"));
    }
    Ok(PhaseSpaceField { x_grid, xi_grid, values })
}

/// `x, re, im` rows for a 1D field.
pub fn field_table(f: &Field) -> Result<Table> {
    if f.grid().dim() != 1 {
        return Err(structural("CSV export is for 1D fields"));
    }
    let mut t = Table::new(["x", "re", "im"]);
    for (x, z) in f.grid().axis_nodes().into_iter().zip(f.values()) {
        t.push(vec![x, z.re, z.im])?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip_is_f32_exact() {
        let g = Grid::new(2, 8, 3.0).unwrap();
        let f = Field::from_fn(g, |x| Complex64::new(x[0] * 0.5, x[1] - 1.0));
        let (g2, blocks) = decode(&encode_field(&f)).unwrap();
        assert_eq!(g2, g);
        for (a, b) in blocks[0].iter().zip(f.values()) {
            assert_eq!(a.re, f64::from(b.re as f32));
            assert_eq!(a.im, f64::from(b.im as f32));
        }
    }

    #[test]
    fn truncated_container_is_rejected() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let bytes = encode_field(&Field::zeros(g));
        assert!(decode(&bytes[..bytes.len() - 3]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
    }

    #[test]
    fn table_rejects_ragged_rows() {
        let mut t = Table::new(["a", "b"]);
        assert!(t.push(vec![1.0]).is_err());
        t.push(vec![1.0, 0.1]).unwrap();
        assert_eq!(String::from_utf8(t.to_csv().unwrap()).unwrap(), "a,b\n1,0.1\n");
    }
}
