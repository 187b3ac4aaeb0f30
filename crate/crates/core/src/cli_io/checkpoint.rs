//! Binary checkpoints.
//!
//! Layout, all little-endian: `b"OKPF"`, version `u32` (= 1), `dim: u32`,
//! `dim` counts as `u32`, `dim` lengths as `f64`, `time: f64`, `step: u64`,
//! then the `u` samples and the `v` samples as `f64`, x fastest.

use std::fs;
use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::dynamics::RunState;
use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Scalar};
use crate::spectral_grid::{Field, GridSpec};

pub const MAGIC: &[u8; 4] = b"OKPF";
pub const VERSION: u32 = 1;

pub fn encode_checkpoint<T: Scalar>(state: &RunState<T>) -> Vec<u8> {
    let grid = state.u.grid();
    let n = grid.num_points();
    let mut out = Vec::with_capacity(32 + 12 * grid.dim() + 16 * n);
    out.extend_from_slice(MAGIC);
    // writes into a Vec cannot fail
    out.write_u32::<LittleEndian>(VERSION).unwrap();
    out.write_u32::<LittleEndian>(grid.dim() as u32).unwrap();
    for &c in grid.counts() {
        out.write_u32::<LittleEndian>(c as u32).unwrap();
    }
    for &l in grid.lengths() {
        out.write_f64::<LittleEndian>(to_f64(l)).unwrap();
    }
    out.write_f64::<LittleEndian>(to_f64(state.time)).unwrap();
    out.write_u64::<LittleEndian>(state.step).unwrap();
    for f in [&state.u, &state.v] {
        for &x in f.values() {
            out.write_f64::<LittleEndian>(to_f64(x)).unwrap();
        }
    }
    out
}

pub fn write_checkpoint<T: Scalar>(path: impl AsRef<Path>, state: &RunState<T>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_checkpoint(state))?;
    f.sync_all()?;
    Ok(())
}

fn corrupt(offset: u64, detail: impl Into<String>) -> Error {
    Error::Corrupt {
        offset,
        detail: detail.into(),
    }
}

pub fn decode_checkpoint<T: Scalar>(bytes: &[u8]) -> Result<RunState<T>> {
    let mut c = Cursor::new(bytes);
    let mut magic = [0u8; 4];
    c.read_exact(&mut magic)
        .map_err(|_| corrupt(0, "file shorter than the magic bytes"))?;
    if &magic != MAGIC {
        return Err(corrupt(0, "bad magic bytes"));
    }
    let u32_at = |c: &mut Cursor<&[u8]>, what: &str| {
        let off = c.position();
        c.read_u32::<LittleEndian>()
            .map_err(|_| corrupt(off, format!("truncated {what}")))
    };
    let f64_at = |c: &mut Cursor<&[u8]>, what: &str| {
        let off = c.position();
        c.read_f64::<LittleEndian>()
            .map_err(|_| corrupt(off, format!("truncated {what}")))
    };
    let version = u32_at(&mut c, "version")?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dim_off = c.position();
    let dim = u32_at(&mut c, "dimension")? as usize;
    if !(dim == 2 || dim == 3) {
        return Err(corrupt(dim_off, format!("dimension {dim} is not 2 or 3")));
    }
    let counts_off = c.position();
    let mut counts = Vec::with_capacity(dim);
    for _ in 0..dim {
        counts.push(u32_at(&mut c, "point count")? as usize);
    }
    let mut lengths = Vec::with_capacity(dim);
    for _ in 0..dim {
        lengths.push(lit::<T>(f64_at(&mut c, "box length")?));
    }
    let grid = GridSpec::new(&counts, &lengths).map_err(|e| corrupt(counts_off, e.to_string()))?;
    let time = lit::<T>(f64_at(&mut c, "time")?);
    let step_off = c.position();
    let step = c
        .read_u64::<LittleEndian>()
        .map_err(|_| corrupt(step_off, "truncated step"))?;
    let n = grid.num_points();
    let header = c.position();
    let expected = header + 16 * n as u64;
    if (bytes.len() as u64) < expected {
        return Err(corrupt(
            bytes.len() as u64,
            format!("expected {expected} bytes, file has {}", bytes.len()),
        ));
    }
    if (bytes.len() as u64) > expected {
        return Err(corrupt(expected, "trailing bytes after field data"));
    }
    let read_field = |c: &mut Cursor<&[u8]>| -> Result<Field<T>> {
        let mut vals = Vec::with_capacity(n);
        for _ in 0..n {
            vals.push(lit::<T>(f64_at(c, "field data")?));
        }
        Field::new(grid, vals)
    };
    let u = read_field(&mut c)?;
    let v = read_field(&mut c)?;
    Ok(RunState {
        u,
        v,
        time,
        step,
        last_energy: EnergyBreakdown::default(),
    })
}

pub fn read_checkpoint<T: Scalar>(path: impl AsRef<Path>) -> Result<RunState<T>> {
    decode_checkpoint(&fs::read(path)?)
}
