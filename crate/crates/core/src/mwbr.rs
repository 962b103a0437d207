//! The MWBR on-disk raster format.
//!
//! Little-endian layout: bytes 0-3 magic `"MWBR"`, u16 version (= 1), u16
//! reserved (= 0), u32 width, u32 height, f32 cell size in meters, then
//! `width * height` f32 values row-major with row 0 at the northern edge.
//! NaN encodes an invalid pixel. Load and save round-trip every bit of the
//! payload, including NaN payloads.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{Grid, Raster};

pub const MAGIC: [u8; 4] = *b"MWBR";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 20;

pub fn save_raster(path: &Path, raster: &Raster) -> Result<()> {
    let mut buf = Vec::with_capacity(HEADER_LEN + raster.values().len() * 4);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&0u16.to_le_bytes());
    buf.extend_from_slice(&raster.width().to_le_bytes());
    buf.extend_from_slice(&raster.height().to_le_bytes());
    buf.extend_from_slice(&raster.cell_size_m().to_le_bytes());
    for v in raster.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

pub fn load_raster(path: &Path) -> Result<Raster> {
    let bytes = fs::read(path)?;
    decode_raster(&bytes)
}

pub fn decode_raster(bytes: &[u8]) -> Result<Raster> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::PayloadSize {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let mut magic = [0u8; 4];
    magic.copy_from_slice(&bytes[0..4]);
    if magic != MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let width = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let height = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
    let cell_size = f32::from_le_bytes(bytes[16..20].try_into().unwrap());
    let grid = Grid::new(width, height, cell_size)?;

    let expected = HEADER_LEN as u64 + grid.len() as u64 * 4;
    if bytes.len() as u64 != expected {
        return Err(Error::PayloadSize {
            expected,
            found: bytes.len() as u64,
        });
    }
    let values: Vec<f32> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Raster::new(grid, values)
}
