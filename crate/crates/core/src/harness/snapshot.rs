//! Binary snapshots of spectral fields.
//!
//! Layout, all integers and floats little-endian:
//!
//! | offset | size | content                                            |
//! |--------|------|----------------------------------------------------|
//! | 0      | 8    | magic `RLXSNAP1`                                   |
//! | 8      | 4    | `u32` number of spatial dimensions `d`             |
//! | 12     | 4·d  | `u32` modes per dimension                          |
//! | …      | 4    | `u32` number of components                         |
//! | …      | 4    | `u32` dtype: 1 = complex128 of a real field, 2 = complex128 |
//! | …      | 8    | `f64` torus side length                            |
//! | …      | 16·N | per component, per mode in row-major order: `re`, `im` as `f64` |

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};

pub const MAGIC: &[u8; 8] = b"RLXSNAP1";
const DTYPE_REAL: u32 = 1;
const DTYPE_COMPLEX: u32 = 2;

pub fn write_snapshot<W: Write>(out: &mut W, field: &SpectralField) -> Result<()> {
    let grid = field.grid();
    out.write_all(MAGIC)?;
    out.write_all(&(grid.dim() as u32).to_le_bytes())?;
    for _ in 0..grid.dim() {
        out.write_all(&(grid.n() as u32).to_le_bytes())?;
    }
    out.write_all(&(field.ncomp() as u32).to_le_bytes())?;
    let dtype = if field.is_real() { DTYPE_REAL } else { DTYPE_COMPLEX };
    out.write_all(&dtype.to_le_bytes())?;
    out.write_all(&grid.length().to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * grid.len());
    for c in field.components() {
        buf.clear();
        for z in c {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Reads a snapshot, reusing `grid` when it matches the header.
pub fn read_snapshot<R: Read>(input: &mut R, grid: Option<&Arc<Grid>>) -> Result<SpectralField> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let dim = read_u32(input)? as usize;
    if dim != Grid::DIM {
        return Err(Error::Snapshot(format!("unsupported dimension {dim}")));
    }
    let dims = (0..dim).map(|_| read_u32(input)).collect::<Result<Vec<_>>>()?;
    if dims.iter().any(|&n| n != dims[0]) {
        return Err(Error::Snapshot(format!("non-square grid {dims:?}")));
    }
    let ncomp = read_u32(input)? as usize;
    let real = match read_u32(input)? {
        DTYPE_REAL => true,
        DTYPE_COMPLEX => false,
        other => return Err(Error::Snapshot(format!("unknown dtype {other}"))),
    };
    let length = read_f64(input)?;
    let n = dims[0] as usize;
    let grid = match grid {
        Some(g) if g.n() == n && g.length() == length => Arc::clone(g),
        _ => Grid::new(n, length)?,
    };
    let mut buf = vec![0u8; 16 * grid.len()];
    let mut components = Vec::with_capacity(ncomp);
    for _ in 0..ncomp {
        input.read_exact(&mut buf)?;
        let c = buf
            .chunks_exact(16)
            .map(|b| {
                let re = f64::from_le_bytes(b[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(b[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        components.push(c);
    }
    SpectralField::from_coefficients(&grid, components, real)
}
