//! Time-interpolation of SAR observations: each pixel of the prediction is
//! the valid-only mean of the `horizon` training observations before and
//! after the query date. Only training imagery feeds the prediction, so
//! evaluating on validation or test dates leaks nothing.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::series::DatedRaster;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunningMeanParams {
    /// Interpolation horizon in observation steps on each side.
    pub horizon: usize,
}

impl Default for RunningMeanParams {
    fn default() -> Self {
        RunningMeanParams { horizon: 3 }
    }
}

/// Predicts the melt fraction at `query_date` from the surrounding training
/// observations. The horizon counts observation index steps, not calendar
/// days, and the query's own image is excluded when it is part of the
/// training series. A pixel with no valid neighbor stays NaN.
pub fn running_mean_sar(
    train: &[DatedRaster],
    query_date: NaiveDate,
    params: &RunningMeanParams,
) -> Result<Raster> {
    if params.horizon == 0 {
        return Err(Error::InvalidParameter(
            "running-mean horizon must be >= 1".into(),
        ));
    }
    if train.is_empty() {
        return Err(Error::EmptyInput("running-mean training series"));
    }
    let grid = train[0].raster.grid();
    for dr in train {
        if dr.raster.grid() != grid {
            return Err(Error::GridMismatch {
                left: grid,
                right: dr.raster.grid(),
            });
        }
    }

    // Insertion position of the query among the ordered training dates.
    let pos = train.partition_point(|dr| dr.date < query_date);
    let own = train.get(pos).map(|dr| dr.date) == Some(query_date);
    let after_start = if own { pos + 1 } else { pos };

    let before = &train[pos.saturating_sub(params.horizon)..pos];
    let after = &train[after_start..(after_start + params.horizon).min(train.len())];

    let n = grid.len();
    let mut sum = vec![0.0f64; n];
    let mut count = vec![0u32; n];
    for dr in before.iter().chain(after) {
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
