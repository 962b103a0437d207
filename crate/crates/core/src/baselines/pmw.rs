//! Passive-microwave melt detection: a pixel melts when its brightness
//! temperature exceeds a linear function of that year's winter mean. The
//! slope and intercept come from an electromagnetic snowpack model and are
//! deliberately not tuned on this dataset, to stay comparable with the
//! operational product.

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{apply_landmask, Raster};
use crate::series::DatedRaster;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PmwThresholdParams {
    /// Slope applied to the winter-mean brightness temperature.
    pub gamma: f64,
    /// Intercept in Kelvin.
    pub omega_kelvin: f64,
}

impl Default for PmwThresholdParams {
    fn default() -> Self {
        PmwThresholdParams {
            gamma: 0.48,
            omega_kelvin: 128.0,
        }
    }
}

/// Per-pixel mean brightness temperature over all January and February
/// images of `year`, valid pixels only.
pub fn pmw_winter_mean(pmw: &[DatedRaster], year: i32) -> Result<Raster> {
    let winter: Vec<&DatedRaster> = pmw
        .iter()
        .filter(|dr| dr.date.year() == year && (dr.date.month() == 1 || dr.date.month() == 2))
        .collect();
    let first = winter
        .first()
        .ok_or(Error::MissingWinterBaseline { year })?;
    let grid = first.raster.grid();
    let mut sum = vec![0.0f64; grid.len()];
    let mut count = vec![0u32; grid.len()];
    for dr in &winter {
        if dr.raster.grid() != grid {
            return Err(Error::GridMismatch {
                left: grid,
                right: dr.raster.grid(),
            });
        }
        for (i, &v) in dr.raster.values().iter().enumerate() {
            if !v.is_nan() {
                sum[i] += v as f64;
                count[i] += 1;
            }
        }
    }
    let values = sum
        .iter()
        .zip(count.iter())
        .map(|(&s, &c)| {
            if c == 0 {
                f32::NAN
            } else {
                (s / c as f64) as f32
            }
        })
        .collect();
    Raster::new(grid, values)
}

/// Binary melt map: 1 where the observation strictly exceeds
/// `gamma * winter_mean + omega`, 0 otherwise, NaN where either input is
/// invalid, then landmasked.
pub fn threshold_pmw(
    pmw: &Raster,
    winter_mean: &Raster,
    params: &PmwThresholdParams,
    landmask: &Raster,
) -> Result<Raster> {
    pmw.same_grid(winter_mean)?;
    let melt = pmw.zip_map(winter_mean, |obs, wm| {
        if obs.is_nan() || wm.is_nan() {
            f32::NAN
        } else if (obs as f64) > params.gamma * wm as f64 + params.omega_kelvin {
            1.0
        } else {
            0.0
        }
    })?;
    apply_landmask(&melt, landmask)
}
