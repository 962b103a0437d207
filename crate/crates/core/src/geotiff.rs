//! GeoTIFF import. Single-band float imagery is converted to the native MWBR
//! representation on ingest; the declared nodata value maps to NaN. This is
//! an import-only path, so the rest of the crate never touches a geospatial
//! toolchain.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use tiff::decoder::{Decoder, DecodingResult};
use tiff::ColorType;

use crate::error::{Error, Result};
use crate::raster::{Grid, Raster};

/// Reads a single-band float GeoTIFF. Pixels equal to `nodata` (or NaN, or
/// both NaN when `nodata` is NaN) become invalid. The cell size is not read
/// from the geo keys; the caller supplies it.
pub fn import_geotiff(path: &Path, nodata: Option<f32>, cell_size_m: f32) -> Result<Raster> {
    let file = File::open(path)?;
    let mut decoder = Decoder::new(BufReader::new(file))?;
    let (width, height) = decoder.dimensions()?;
    match decoder.colortype()? {
        ColorType::Gray(_) => {}
        other => {
            return Err(Error::UnsupportedGeoTiff(format!(
                "expected a single-band image, found {other:?}"
            )))
        }
    }
    let values: Vec<f32> = match decoder.read_image()? {
        DecodingResult::F32(v) => v,
        DecodingResult::F64(v) => v.into_iter().map(|x| x as f32).collect(),
        _ => {
            return Err(Error::UnsupportedGeoTiff(
                "expected 32- or 64-bit float samples".into(),
            ))
        }
    };
    let grid = Grid::new(width, height, cell_size_m)?;
    if values.len() != grid.len() {
        return Err(Error::ValueLength {
            len: values.len(),
            grid,
        });
    }
    let values = match nodata {
        Some(nd) if nd.is_nan() => values,
        Some(nd) => values
            .into_iter()
            .map(|v| if v == nd { f32::NAN } else { v })
            .collect(),
        None => values,
    };
    Raster::new(grid, values)
}
