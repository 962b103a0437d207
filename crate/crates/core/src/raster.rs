//! Masked single-band rasters.
//!
//! A [`Raster`] is one 2-D field of 32-bit floats on a fixed-cell-size grid.
//! Invalid pixels (ocean, swath gaps, artifacts) are encoded as IEEE-754 NaN
//! in the value buffer itself; there is no separate mask band. Rasters are
//! immutable after construction and safe to share across threads. All
//! mutation happens by producing new rasters.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid geometry shared by rasters that are combined pixelwise.
/// Row 0 is the northern edge; values are row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub width: u32,
    pub height: u32,
    pub cell_size_m: f32,
}

impl Grid {
    pub fn new(width: u32, height: u32, cell_size_m: f32) -> Result<Self> {
        if width == 0 || height == 0 || cell_size_m <= 0.0 || !cell_size_m.is_finite() {
            return Err(Error::DegenerateGrid);
        }
        // Reject sizes whose pixel count cannot be addressed.
        let pixels = (width as u64)
            .checked_mul(height as u64)
            .ok_or(Error::DimensionOverflow { width, height })?;
        if usize::try_from(pixels).is_err() || pixels.checked_mul(4).is_none() {
            return Err(Error::DimensionOverflow { width, height });
        }
        Ok(Grid {
            width,
            height,
            cell_size_m,
        })
    }

    pub fn len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}@{}m", self.width, self.height, self.cell_size_m)
    }
}

/// One masked 2-D field. NaN marks invalid pixels.
#[derive(Clone, Debug)]
pub struct Raster {
    grid: Grid,
    values: Vec<f32>,
}

impl Raster {
    pub fn new(grid: Grid, values: Vec<f32>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ValueLength {
                len: values.len(),
                grid,
            });
        }
        Ok(Raster { grid, values })
    }

    pub fn from_dims(width: u32, height: u32, cell_size_m: f32, values: Vec<f32>) -> Result<Self> {
        Raster::new(Grid::new(width, height, cell_size_m)?, values)
    }

    pub fn filled(grid: Grid, value: f32) -> Self {
        Raster {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Builds a raster by evaluating `f(row, col)` at every cell.
    pub fn from_fn<F: FnMut(u32, u32) -> f32>(grid: Grid, mut f: F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for row in 0..grid.height {
            for col in 0..grid.width {
                values.push(f(row, col));
            }
        }
        Raster { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn width(&self) -> u32 {
        self.grid.width
    }

    pub fn height(&self) -> u32 {
        self.grid.height
    }

    pub fn cell_size_m(&self) -> f32 {
        self.grid.cell_size_m
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    #[inline]
    pub fn get(&self, row: u32, col: u32) -> f32 {
        self.values[row as usize * self.grid.width as usize + col as usize]
    }

    pub fn n_valid(&self) -> usize {
        self.values.iter().filter(|v| !v.is_nan()).count()
    }

    /// Count of valid pixels and their fraction of the full grid.
    pub fn valid_stats(&self) -> (usize, f64) {
        let n = self.n_valid();
        (n, n as f64 / self.grid.len() as f64)
    }

    pub fn same_grid(&self, other: &Raster) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid,
                right: other.grid,
            });
        }
        Ok(())
    }

    /// New raster with `f` applied to every pixel value.
    pub fn map<F: FnMut(f32) -> f32>(&self, f: F) -> Raster {
        Raster {
            grid: self.grid,
            values: self.values.iter().copied().map(f).collect(),
        }
    }

    /// New raster combining two same-grid rasters pixelwise.
    pub fn zip_map<F: FnMut(f32, f32) -> f32>(&self, other: &Raster, mut f: F) -> Result<Raster> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Raster {
            grid: self.grid,
            values,
        })
    }

    /// Bitwise equality, including NaN positions and payloads.
    pub fn bits_eq(&self, other: &Raster) -> bool {
        self.grid == other.grid
            && self
                .values
                .iter()
                .zip(other.values.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Masks out pixels that are not land. A pixel becomes invalid where the
/// landmask is below 0.5 (majority vote of the averaged binary mask) or not
/// valid itself; land pixels pass through unchanged.
pub fn apply_landmask(raster: &Raster, landmask: &Raster) -> Result<Raster> {
    raster.same_grid(landmask)?;
    for &m in landmask.values() {
        if !m.is_nan() && !(0.0..=1.0).contains(&m) {
            return Err(Error::InvalidParameter(format!(
                "landmask value {m} outside [0, 1]"
            )));
        }
    }
    raster.zip_map(
        landmask,
        |v, m| {
            if m.is_nan() || m < 0.5 {
                f32::NAN
            } else {
                v
            }
        },
    )
}

/// Valid-pixel bookkeeping across a series: per-raster counts and their sum.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidSet {
    pub counts: Vec<usize>,
    pub total: usize,
}

impl ValidSet {
    pub fn from_rasters<'a, I: IntoIterator<Item = &'a Raster>>(rasters: I) -> Self {
        let counts: Vec<usize> = rasters.into_iter().map(|r| r.n_valid()).collect();
        let total = counts.iter().sum();
        ValidSet { counts, total }
    }
}
