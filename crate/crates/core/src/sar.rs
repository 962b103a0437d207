//! Deriving 100 m melt-fraction targets from calibrated 10 m SAR backscatter.
//!
//! Scenes are grouped by the 12-day repeat cycle so each observation is only
//! compared against winter references collected with the same orbital
//! geometry. A scene melts where its backscatter drops more than 3 dB below
//! the group's winter mean; same-day binaries are mosaicked with an OR rule
//! and aggregated to melt fractions on the coarse grid.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate, NaiveDateTime};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::series::DatedRaster;

/// Repeat cycle of the SAR constellation.
pub const REPEAT_CYCLE_SECONDS: i64 = 12 * 24 * 3600;
/// Tolerance around the repeat cycle when chaining scenes into orbit groups.
pub const REPEAT_TOLERANCE_SECONDS: i64 = 4;
/// Melt threshold relative to the winter mean, in dB.
pub const MELT_THRESHOLD_DB: f64 = -3.0;

/// One calibrated backscatter scene in dB on the 10 m subgrid.
#[derive(Clone, Debug)]
pub struct SarScene {
    pub acquired: NaiveDateTime,
    pub raster: Raster,
}

impl SarScene {
    pub fn date(&self) -> NaiveDate {
        self.acquired.date()
    }
}

/// Assigns each scene an orbit-group id by chaining timestamps that differ by
/// exactly one repeat cycle within the tolerance. Scenes must be sorted by
/// acquisition time with unique timestamps. When several prior scenes match,
/// the most recent one wins.
pub fn group_by_repeat_cycle(scenes: &[SarScene]) -> Result<Vec<usize>> {
    for pair in scenes.windows(2) {
        if pair[1].acquired <= pair[0].acquired {
            return Err(Error::InvalidParameter(format!(
                "scenes must be sorted by unique acquisition time, got {} after {}",
                pair[1].acquired, pair[0].acquired
            )));
        }
    }
    let mut groups = Vec::with_capacity(scenes.len());
    let mut next_group = 0usize;
    for (i, scene) in scenes.iter().enumerate() {
        let mut assigned = None;
        for j in (0..i).rev() {
            let dt = (scene.acquired - scenes[j].acquired).num_seconds();
            if dt > REPEAT_CYCLE_SECONDS + REPEAT_TOLERANCE_SECONDS {
                break;
            }
            if (dt - REPEAT_CYCLE_SECONDS).abs() <= REPEAT_TOLERANCE_SECONDS {
                assigned = Some(groups[j]);
                break;
            }
        }
        groups.push(assigned.unwrap_or_else(|| {
            next_group += 1;
            next_group - 1
        }));
    }
    Ok(groups)
}

/// Winter window preceding the melt season of `melt_year`: December of the
/// prior year through February.
pub fn in_winter_window(date: NaiveDate, melt_year: i32) -> bool {
    (date.year() == melt_year - 1 && date.month() == 12)
        || (date.year() == melt_year && date.month() <= 2)
}

/// Per-pixel valid-only mean backscatter over the group's winter scenes, in
/// the dB domain.
pub fn winter_mean_backscatter(group: &[&SarScene], melt_year: i32) -> Result<Raster> {
    let winter: Vec<&&SarScene> = group
        .iter()
        .filter(|s| in_winter_window(s.date(), melt_year))
        .collect();
    let first = winter
        .first()
        .ok_or(Error::MissingWinterBaseline { year: melt_year })?;
    let grid = first.raster.grid();
    let mut sum = vec![0.0f64; grid.len()];
    let mut count = vec![0u32; grid.len()];
    for scene in &winter {
        if scene.raster.grid() != grid {
            return Err(Error::GridMismatch {
                left: grid,
                right: scene.raster.grid(),
            });
        }
        for (i, &v) in scene.raster.values().iter().enumerate() {
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

/// Binary melt at 10 m: 1 where the scene sits strictly more than
/// `|threshold_db|` below the winter mean, 0 otherwise, NaN where either
/// side is invalid.
pub fn threshold_melt(scene: &SarScene, winter_mean: &Raster, threshold_db: f64) -> Result<Raster> {
    scene.raster.zip_map(winter_mean, |obs, wm| {
        if obs.is_nan() || wm.is_nan() {
            f32::NAN
        } else if (obs as f64 - wm as f64) < threshold_db {
            1.0
        } else {
            0.0
        }
    })
}

/// Same-day mosaic: melt wherever any contributor melts, no-melt where at
/// least one contributor observed no melt, NaN where nothing was observed.
pub fn mosaic_daily(binaries: &[Raster]) -> Result<Raster> {
    let first = binaries.first().ok_or(Error::EmptyInput("daily mosaic"))?;
    let grid = first.grid();
    let mut out = vec![f32::NAN; grid.len()];
    for b in binaries {
        if b.grid() != grid {
            return Err(Error::GridMismatch {
                left: grid,
                right: b.grid(),
            });
        }
        for (o, &v) in out.iter_mut().zip(b.values()) {
            if v.is_nan() {
                continue;
            }
            if o.is_nan() || v == 1.0 {
                *o = v;
            }
        }
    }
    Raster::new(grid, out)
}

/// Aggregates a fine binary melt raster onto a grid coarsened by `factor`:
/// each coarse cell holds melt subcells divided by valid subcells, NaN when
/// nothing below is valid. Fine dimensions that do not divide evenly are
/// padded with NaN.
pub fn aggregate_fraction(binary: &Raster, factor: u32) -> Result<Raster> {
    if factor == 0 {
        return Err(Error::InvalidParameter(
            "aggregation factor must be >= 1".into(),
        ));
    }
    let out_w = binary.width().div_ceil(factor);
    let out_h = binary.height().div_ceil(factor);
    let grid = crate::raster::Grid::new(out_w, out_h, binary.cell_size_m() * factor as f32)?;
    let mut values = Vec::with_capacity(grid.len());
    for cr in 0..out_h {
        for cc in 0..out_w {
            let mut melt = 0u32;
            let mut valid = 0u32;
            for r in cr * factor..((cr + 1) * factor).min(binary.height()) {
                for c in cc * factor..((cc + 1) * factor).min(binary.width()) {
                    let v = binary.get(r, c);
                    if v.is_nan() {
                        continue;
                    }
                    valid += 1;
                    if v == 1.0 {
                        melt += 1;
                    }
                }
            }
            values.push(if valid == 0 {
                f32::NAN
            } else {
                melt as f32 / valid as f32
            });
        }
    }
    Raster::new(grid, values)
}

/// A scene that could not be thresholded and why.
#[derive(Clone, Debug)]
pub struct SkippedScene {
    pub acquired: NaiveDateTime,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct DeriveOutcome {
    pub fractions: Vec<DatedRaster>,
    pub skipped: Vec<SkippedScene>,
}

/// Full derivation: group, threshold against the matching winter mean,
/// mosaic per day, aggregate to the coarse grid. Only scenes within the
/// melt-season months are emitted; scenes whose group has no winter
/// reference are skipped and reported.
pub fn derive_daily_fractions(
    scenes: &[SarScene],
    factor: u32,
    season_months: std::ops::RangeInclusive<u32>,
) -> Result<DeriveOutcome> {
    if scenes.is_empty() {
        return Err(Error::EmptyInput("SAR scenes"));
    }
    let groups = group_by_repeat_cycle(scenes)?;

    let mut winter_means: BTreeMap<(usize, i32), Option<Raster>> = BTreeMap::new();
    let mut skipped = Vec::new();
    let mut by_day: BTreeMap<NaiveDate, Vec<Raster>> = BTreeMap::new();

    for (i, scene) in scenes.iter().enumerate() {
        let month = scene.date().month();
        if !season_months.contains(&month) {
            continue;
        }
        let melt_year = scene.date().year();
        let key = (groups[i], melt_year);
        let wm = winter_means.entry(key).or_insert_with(|| {
            let members: Vec<&SarScene> = scenes
                .iter()
                .enumerate()
                .filter(|&(j, _)| groups[j] == key.0)
                .map(|(_, s)| s)
                .collect();
            winter_mean_backscatter(&members, melt_year).ok()
        });
        match wm {
            Some(wm) => {
                let melt = threshold_melt(scene, wm, MELT_THRESHOLD_DB)?;
                by_day.entry(scene.date()).or_default().push(melt);
            }
            None => skipped.push(SkippedScene {
                acquired: scene.acquired,
                reason: format!(
                    "missing winter reference for orbit group {} in {melt_year}",
                    groups[i]
                ),
            }),
        }
    }

    let fractions: Vec<DatedRaster> = by_day
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(date, binaries)| {
            let mosaic = mosaic_daily(&binaries)?;
            Ok(DatedRaster::new(date, aggregate_fraction(&mosaic, factor)?))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(DeriveOutcome { fractions, skipped })
}
