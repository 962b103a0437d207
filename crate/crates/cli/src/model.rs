//! Runtime wiring of a named model to its input streams: loads what each
//! baseline needs from the dataset root and predicts one raster per date.
//! The external model runs an arbitrary command per tile through the mosaic
//! machinery, exchanging MWBR tiles on disk.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use chrono::{Datelike, NaiveDate};
use meltkit_core::baselines::{
    interpolate_mar, pmw_winter_mean, running_mean_sar, threshold_dem_predict, threshold_pmw,
    DemBandParams, MarCalibParams, ModelParams, PmwThresholdParams, RunningMeanParams,
};
use meltkit_core::raster::{apply_landmask, Grid, Raster};
use meltkit_core::series::{DatedRaster, Manifest, RasterSeries, Stream};
use meltkit_core::splits::{SplitAssignment, SplitSet};
use meltkit_core::tiling::{
    mosaic_predict, preprocess_inputs, ChannelPreproc, ChannelStack, PreprocConfig, TileInput,
    TileSpec,
};
use meltkit_core::{mwbr, Error};

use crate::error::{config_err, data_err, CliError, CliResult};

pub const MODEL_NAMES: &str =
    "running_mean_sar, interpolate_mar, threshold_pmw, threshold_dem, external";

/// Settings for the external tile-command bridge.
#[derive(Clone, Debug)]
pub struct ExternalSpec {
    /// Command and leading arguments; the tile directory is appended.
    pub exec: Vec<String>,
    pub tile_spec: TileSpec,
    /// Run tiles one at a time for commands that are not concurrency-safe.
    pub serial: bool,
    /// Skip blur/standardization of the input stack.
    pub no_preprocess: bool,
    /// Scratch directory for tile exchange.
    pub workdir: PathBuf,
}

pub enum Predictor {
    RunningMean {
        series: RasterSeries,
        train_dates: Vec<NaiveDate>,
        params: RunningMeanParams,
        landmask: Raster,
    },
    Mar {
        series: RasterSeries,
        params: MarCalibParams,
        landmask: Raster,
    },
    Pmw {
        series: RasterSeries,
        params: PmwThresholdParams,
        winter_means: BTreeMap<i32, Raster>,
        landmask: Raster,
    },
    Dem {
        dem: Raster,
        params: DemBandParams,
        landmask: Raster,
    },
    External {
        mar: RasterSeries,
        pmw: RasterSeries,
        dem: Raster,
        targets: RasterSeries,
        train_dates: Vec<NaiveDate>,
        rm_params: RunningMeanParams,
        preproc: Option<PreprocConfig>,
        spec: ExternalSpec,
        landmask: Raster,
    },
}

fn load_landmask(root: &Path, manifest: &Manifest) -> CliResult<Raster> {
    Ok(manifest.series(root, Stream::Landmask)?.load_static()?)
}

fn train_dates_for(
    series: &RasterSeries,
    split: Option<&SplitAssignment>,
) -> CliResult<Vec<NaiveDate>> {
    let split =
        split.ok_or_else(|| config_err("this model needs --split to know the training days"))?;
    let train = split.dates_in(SplitSet::Train);
    Ok(train.into_iter().filter(|&d| series.contains(d)).collect())
}

fn missing_input(stream: Stream, date: NaiveDate) -> CliError {
    data_err(format!("missing input stream '{stream}' for {date}"))
}

fn load_for(series: &RasterSeries, date: NaiveDate) -> CliResult<Raster> {
    series.load(date).map_err(|e| match e {
        Error::MissingDate { date } => missing_input(series.stream(), date),
        other => other.into(),
    })
}

/// Running-mean prediction loading only the neighbor images from disk.
fn running_mean_from_series(
    series: &RasterSeries,
    train_dates: &[NaiveDate],
    date: NaiveDate,
    params: &RunningMeanParams,
) -> CliResult<Raster> {
    let pos = train_dates.partition_point(|d| *d < date);
    let own = train_dates.get(pos) == Some(&date);
    let after_start = if own { pos + 1 } else { pos };
    let before = &train_dates[pos.saturating_sub(params.horizon)..pos];
    let after = &train_dates[after_start..(after_start + params.horizon).min(train_dates.len())];
    let neighbors: Vec<DatedRaster> = before
        .iter()
        .chain(after)
        .map(|&d| Ok(DatedRaster::new(d, load_for(series, d)?)))
        .collect::<CliResult<Vec<_>>>()?;
    if neighbors.is_empty() {
        return Err(data_err(format!("no training observations around {date}")));
    }
    Ok(running_mean_sar(&neighbors, date, params)?)
}

/// Pooled valid-pixel stats streamed over a series without holding it all.
fn streamed_stats(series: &RasterSeries, dates: &[NaiveDate]) -> CliResult<(f64, f64)> {
    let mut n = 0usize;
    let mut sum = 0.0f64;
    let mut sq = 0.0f64;
    let mut feed = |raster: &Raster| {
        for &v in raster.values() {
            if !v.is_nan() {
                n += 1;
                sum += v as f64;
                sq += v as f64 * v as f64;
            }
        }
    };
    for &d in dates {
        feed(&load_for(series, d)?);
    }
    if n == 0 {
        return Err(data_err(format!(
            "stream '{}' has no valid pixels",
            series.stream()
        )));
    }
    let mean = sum / n as f64;
    Ok((mean, (sq / n as f64 - mean * mean).max(0.0).sqrt()))
}

impl Predictor {
    pub fn build(
        root: &Path,
        manifest: &Manifest,
        params: &ModelParams,
        split: Option<&SplitAssignment>,
    ) -> CliResult<Predictor> {
        let landmask = load_landmask(root, manifest)?;
        Ok(match params {
            ModelParams::RunningMeanSar(p) => {
                let series = manifest.series(root, Stream::SarTarget)?;
                let train_dates = train_dates_for(&series, split)?;
                Predictor::RunningMean {
                    series,
                    train_dates,
                    params: *p,
                    landmask,
                }
            }
            ModelParams::InterpolateMar(p) => Predictor::Mar {
                series: manifest.series(root, Stream::MarWa1)?,
                params: *p,
                landmask,
            },
            ModelParams::ThresholdPmw(p) => {
                let series = manifest.series(root, Stream::PmwTb)?;
                // Precompute the winter mean of every year that has one.
                let years: std::collections::BTreeSet<i32> =
                    series.dates().iter().map(|d| d.year()).collect();
                let mut winter_means = BTreeMap::new();
                for year in years {
                    let winter_dates: Vec<NaiveDate> = series
                        .dates()
                        .into_iter()
                        .filter(|d| d.year() == year && d.month() <= 2)
                        .collect();
                    if winter_dates.is_empty() {
                        continue;
                    }
                    let images = series.load_dates(&winter_dates)?;
                    winter_means.insert(year, pmw_winter_mean(&images, year)?);
                }
                Predictor::Pmw {
                    series,
                    params: *p,
                    winter_means,
                    landmask,
                }
            }
            ModelParams::ThresholdDem(p) => Predictor::Dem {
                dem: manifest.series(root, Stream::Dem)?.load_static()?,
                params: p.clone(),
                landmask,
            },
        })
    }

    pub fn build_external(
        root: &Path,
        manifest: &Manifest,
        split: Option<&SplitAssignment>,
        rm_params: RunningMeanParams,
        spec: ExternalSpec,
    ) -> CliResult<Predictor> {
        let landmask = load_landmask(root, manifest)?;
        let mar = manifest.series(root, Stream::MarWa1)?;
        let pmw = manifest.series(root, Stream::PmwTb)?;
        let dem = manifest.series(root, Stream::Dem)?.load_static()?;
        let targets = manifest.series(root, Stream::SarTarget)?;
        let train_dates = train_dates_for(&targets, split)?;

        let preproc = if spec.no_preprocess {
            None
        } else {
            // Normalization statistics come from the training split only.
            let mar_stats = streamed_stats(&mar, &mar_dates_of(&mar, &train_dates))?;
            let pmw_stats = streamed_stats(&pmw, &mar_dates_of(&pmw, &train_dates))?;
            let dem_stats = meltkit_core::tiling::channel_stats([&dem])
                .ok_or_else(|| data_err("DEM has no valid pixels"))?;
            let mut rm_n = 0usize;
            let mut rm_sum = 0.0f64;
            let mut rm_sq = 0.0f64;
            for &d in &train_dates {
                let rm = running_mean_from_series(&targets, &train_dates, d, &rm_params)?;
                for &v in rm.values() {
                    if !v.is_nan() {
                        rm_n += 1;
                        rm_sum += v as f64;
                        rm_sq += v as f64 * v as f64;
                    }
                }
            }
            if rm_n == 0 {
                return Err(data_err(
                    "running-mean channel has no valid pixels on train days",
                ));
            }
            let rm_mean = rm_sum / rm_n as f64;
            let rm_std = (rm_sq / rm_n as f64 - rm_mean * rm_mean).max(0.0).sqrt();
            let blurs = [Some((99usize, 33.0f64)), Some((45, 15.0)), None, None];
            let stats = [mar_stats, pmw_stats, dem_stats, (rm_mean, rm_std)];
            Some(PreprocConfig {
                channels: blurs
                    .iter()
                    .zip(stats.iter())
                    .map(|(&blur, &(mean, std))| ChannelPreproc { blur, mean, std })
                    .collect(),
            })
        };

        Ok(Predictor::External {
            mar,
            pmw,
            dem,
            targets,
            train_dates,
            rm_params,
            preproc,
            spec,
            landmask,
        })
    }

    pub fn model_name(&self) -> &'static str {
        match self {
            Predictor::RunningMean { .. } => "running_mean_sar",
            Predictor::Mar { .. } => "interpolate_mar",
            Predictor::Pmw { .. } => "threshold_pmw",
            Predictor::Dem { .. } => "threshold_dem",
            Predictor::External { .. } => "external",
        }
    }

    pub fn predict(&self, date: NaiveDate) -> CliResult<Raster> {
        match self {
            Predictor::RunningMean {
                series,
                train_dates,
                params,
                landmask,
            } => {
                let raster = running_mean_from_series(series, train_dates, date, params)?;
                Ok(apply_landmask(&raster, landmask)?)
            }
            Predictor::Mar {
                series,
                params,
                landmask,
            } => {
                let mar = load_for(series, date)?;
                Ok(interpolate_mar(&mar, params, landmask)?)
            }
            Predictor::Pmw {
                series,
                params,
                winter_means,
                landmask,
            } => {
                let obs = load_for(series, date)?;
                let wm = winter_means
                    .get(&date.year())
                    .ok_or(Error::MissingWinterBaseline { year: date.year() })?;
                Ok(threshold_pmw(&obs, wm, params, landmask)?)
            }
            Predictor::Dem {
                dem,
                params,
                landmask,
            } => Ok(threshold_dem_predict(dem, params, date.month(), landmask)?),
            Predictor::External {
                mar,
                pmw,
                dem,
                targets,
                train_dates,
                rm_params,
                preproc,
                spec,
                landmask,
            } => {
                let mar_r = load_for(mar, date)?;
                let pmw_r = load_for(pmw, date)?;
                let rm = running_mean_from_series(targets, train_dates, date, rm_params)?;
                let mut stack = ChannelStack::new(vec![mar_r, pmw_r, dem.clone(), rm])?;
                if let Some(cfg) = preproc {
                    stack = preprocess_inputs(&stack, cfg)?;
                }
                let raster = run_external(&stack, spec, date)?;
                Ok(apply_landmask(&raster, landmask)?)
            }
        }
    }
}

fn mar_dates_of(series: &RasterSeries, train_dates: &[NaiveDate]) -> Vec<NaiveDate> {
    train_dates
        .iter()
        .copied()
        .filter(|&d| series.contains(d))
        .collect()
}

fn run_external(stack: &ChannelStack, spec: &ExternalSpec, date: NaiveDate) -> CliResult<Raster> {
    if spec.exec.is_empty() {
        return Err(config_err("external model needs --exec"));
    }
    let scratch = spec.workdir.join(format!("tiles-{date}"));
    std::fs::create_dir_all(&scratch)
        .map_err(|e| data_err(format!("creating {}: {e}", scratch.display())))?;
    let counter = std::sync::atomic::AtomicUsize::new(0);

    let tile_fn = |tile: &TileInput| -> meltkit_core::Result<Vec<f32>> {
        let idx = counter.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let dir = scratch.join(format!("tile_{idx:05}"));
        std::fs::create_dir_all(&dir)?;
        let grid = Grid::new(tile.width, tile.height, tile.cell_size_m)
            .map_err(|_| Error::DegenerateGrid)?;
        for ch in 0..tile.n_channels() {
            let raster = Raster::new(grid, tile.channel(ch).to_vec())?;
            mwbr::save_raster(&dir.join(format!("in_{ch:02}.mwbr")), &raster)?;
        }
        let status = Command::new(&spec.exec[0])
            .args(&spec.exec[1..])
            .arg(&dir)
            .status()
            .map_err(|e| {
                Error::Io(std::io::Error::other(format!(
                    "spawning {}: {e}",
                    spec.exec[0]
                )))
            })?;
        if !status.success() {
            return Err(Error::Io(std::io::Error::other(format!(
                "external command failed with {status} on {}",
                dir.display()
            ))));
        }
        let out = mwbr::load_raster(&dir.join("out.mwbr"))?;
        Ok(out.into_values())
    };

    let result = mosaic_predict(stack, &spec.tile_spec, !spec.serial, tile_fn);
    let _ = std::fs::remove_dir_all(&scratch);
    Ok(result?)
}
