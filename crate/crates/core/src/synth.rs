//! Deterministic synthetic dataset generator.
//!
//! Reproduces the shape of the real data at desk scale: a static DEM with a
//! coastal gradient, a land-ocean mask, daily block-constant MAR-like and
//! PMW-like coarse fields, swath-masked melt-fraction targets on revisit
//! days, and the dense ground-truth melt field the real dataset cannot
//! offer. Melt follows an elevation line that rises and falls over the
//! season, with planted extreme-melt days where the line jumps.
//!
//! All randomness derives from (seed, date, purpose), so day-level
//! parallelism and thread counts never change the output bytes.

use std::path::Path;

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conv::gaussian_blur_f32;
use crate::error::{Error, Result};
use crate::mwbr::save_raster;
use crate::raster::{Grid, Raster};
use crate::series::{Manifest, ManifestEntry, Stream};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthConfig {
    pub grid: Grid,
    pub years: Vec<i32>,
    /// Gap between consecutive SAR observation days.
    pub sar_revisit_days: u32,
    /// Valid-pixel fractions of the cycling swath patterns.
    pub swath_coverages: Vec<f64>,
    pub land_fraction: f64,
    pub max_elevation_m: f64,
    /// Elevation of the melt line at the season edges.
    pub melt_line_base_m: f64,
    /// Seasonal amplitude of the melt line.
    pub melt_line_amp_m: f64,
    /// Softness of the melt transition across elevation.
    pub melt_softness_m: f64,
    /// Multiplier on the melt line during an extreme-melt day.
    pub event_boost_factor: f64,
    /// Extreme-melt days; None plants June 12 of every year.
    pub event_dates: Option<Vec<NaiveDate>>,
    /// Speckle noise on the dense truth.
    pub noise_sigma: f64,
    /// Native block size of the MAR-like field, in product cells.
    pub mar_block: u32,
    /// Native block size of the PMW-like field, in product cells.
    pub pmw_block: u32,
    /// Liquid-water content corresponding to full melt.
    pub mar_wa1_scale: f64,
    pub pmw_winter_kelvin: f64,
    pub pmw_melt_gain_kelvin: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            grid: Grid::new(512, 384, 100.0).unwrap(),
            years: vec![2018, 2019],
            sar_revisit_days: 2,
            swath_coverages: vec![0.05, 0.15, 0.45, 0.55, 0.70],
            land_fraction: 0.72,
            max_elevation_m: 1500.0,
            melt_line_base_m: 60.0,
            melt_line_amp_m: 430.0,
            melt_softness_m: 60.0,
            event_boost_factor: 2.0,
            event_dates: None,
            noise_sigma: 0.02,
            mar_block: 50,
            pmw_block: 31,
            mar_wa1_scale: 0.008,
            pmw_winter_kelvin: 200.0,
            pmw_melt_gain_kelvin: 45.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.grid.width < 8 || self.grid.height < 8 {
            return Err(Error::DegenerateGrid);
        }
        if !(0.0..1.0).contains(&self.land_fraction) || self.land_fraction == 0.0 {
            return Err(Error::InvalidParameter(
                "land fraction must be in (0, 1)".into(),
            ));
        }
        if self.swath_coverages.is_empty()
            || self.swath_coverages.iter().any(|c| !(0.0 < *c && *c < 1.0))
        {
            return Err(Error::InvalidParameter(
                "swath coverages must be in (0, 1)".into(),
            ));
        }
        if self.years.is_empty() {
            return Err(Error::EmptyInput("years"));
        }
        if self.sar_revisit_days == 0 || self.mar_block == 0 || self.pmw_block == 0 {
            return Err(Error::InvalidParameter(
                "revisit and block sizes must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn event_days(&self) -> Vec<NaiveDate> {
        match &self.event_dates {
            Some(d) => d.clone(),
            None => self
                .years
                .iter()
                .filter_map(|&y| NaiveDate::from_ymd_opt(y, 6, 12))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthSummary {
    pub season_days: usize,
    pub sar_days: usize,
    pub pmw_images: usize,
    pub mar_images: usize,
}

const SALT_STATIC: u64 = 1;
const SALT_TRUTH: u64 = 2;
const SALT_MAR: u64 = 3;
const SALT_PMW: u64 = 4;
const SALT_WINTER_BASE: u64 = 5;

fn mix(a: u64, b: u64) -> u64 {
    // splitmix64 finalizer over the xored inputs.
    let mut z = a ^ b.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn day_rng(seed: u64, salt: u64, date: NaiveDate) -> ChaCha8Rng {
    let days = date.num_days_from_ce() as u64;
    ChaCha8Rng::seed_from_u64(mix(mix(seed, salt), days))
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Mean of each `block x block` cell of a full-resolution field.
fn block_means(values: &[f32], width: u32, height: u32, block: u32) -> Vec<f64> {
    let bw = width.div_ceil(block);
    let bh = height.div_ceil(block);
    let mut out = Vec::with_capacity((bw * bh) as usize);
    for br in 0..bh {
        for bc in 0..bw {
            let mut sum = 0.0f64;
            let mut n = 0usize;
            for r in br * block..((br + 1) * block).min(height) {
                for c in bc * block..((bc + 1) * block).min(width) {
                    sum += values[(r * width + c) as usize] as f64;
                    n += 1;
                }
            }
            out.push(sum / n as f64);
        }
    }
    out
}

fn broadcast_blocks<F: Fn(usize, f64) -> f32>(
    blocks: &[f64],
    width: u32,
    height: u32,
    block: u32,
    f: F,
) -> Vec<f32> {
    let bw = width.div_ceil(block);
    let mut out = Vec::with_capacity((width * height) as usize);
    for r in 0..height {
        for c in 0..width {
            let bi = ((r / block) * bw + c / block) as usize;
            out.push(f(bi, blocks[bi]));
        }
    }
    out
}

struct StaticFields {
    dem: Vec<f32>,
    land: Vec<bool>,
    swaths: Vec<Vec<bool>>,
}

fn build_static(cfg: &SynthConfig) -> StaticFields {
    let (w, h) = (cfg.grid.width, cfg.grid.height);
    let n = cfg.grid.len();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(cfg.seed, SALT_STATIC));

    // Smoothed ridges in [0, 1].
    let white: Vec<f32> = (0..n).map(|_| rng.gen::<f32>()).collect();
    let smooth = gaussian_blur_f32(&white, w as usize, h as usize, 31, 6.0);
    let (lo, hi) = smooth
        .iter()
        .fold((f32::MAX, f32::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let ridge: Vec<f32> = smooth
        .iter()
        .map(|&v| (v - lo) / (hi - lo).max(1e-9))
        .collect();

    // Wavy coastline south of which lies ocean. Row 0 is the northern,
    // inland edge.
    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let coast: Vec<f64> = (0..w)
        .map(|c| {
            let wave = (std::f64::consts::TAU * 3.0 * c as f64 / w as f64 + phase).sin();
            (h as f64 * cfg.land_fraction + h as f64 * 0.03 * wave).clamp(1.0, h as f64 - 1.0)
        })
        .collect();

    let mut dem = vec![0.0f32; n];
    let mut land = vec![false; n];
    for r in 0..h {
        for c in 0..w {
            let i = (r * w + c) as usize;
            if (r as f64) < coast[c as usize] {
                land[i] = true;
                let depth = (coast[c as usize] - r as f64) / coast[c as usize];
                dem[i] = (cfg.max_elevation_m * depth * (0.7 + 0.3 * ridge[i] as f64)) as f32;
            }
        }
    }

    // Diagonal swath bands selected by rank over a directional projection,
    // so each pattern's coverage is exact up to rounding.
    let mut swaths = Vec::with_capacity(cfg.swath_coverages.len());
    for (k, &cov) in cfg.swath_coverages.iter().enumerate() {
        let theta = (-40.0 + 23.0 * k as f64).to_radians();
        let mut proj: Vec<(f64, usize)> = (0..n)
            .map(|i| {
                let r = (i as u32 / w) as f64 / h as f64;
                let c = (i as u32 % w) as f64 / w as f64;
                (c * theta.cos() + r * theta.sin(), i)
            })
            .collect();
        proj.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let start = ((k as f64 * 0.371).fract() * (1.0 - cov) * n as f64) as usize;
        let count = (cov * n as f64).round() as usize;
        let mut mask = vec![false; n];
        for &(_, i) in proj.iter().skip(start).take(count) {
            mask[i] = true;
        }
        swaths.push(mask);
    }

    StaticFields { dem, land, swaths }
}

fn season_days(year: i32) -> Vec<NaiveDate> {
    let mut days = Vec::new();
    let mut d = NaiveDate::from_ymd_opt(year, 4, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(year, 9, 30).unwrap();
    while d <= end {
        days.push(d);
        d = d.succ_opt().unwrap();
    }
    days
}

fn pmw_winter_days(year: i32) -> Vec<NaiveDate> {
    [1u32, 2]
        .iter()
        .flat_map(|&m| [5u32, 15, 25].iter().map(move |&day| (m, day)))
        .filter_map(|(m, day)| NaiveDate::from_ymd_opt(year, m, day))
        .collect()
}

/// Elevation of the melt line for a season day.
fn melt_line(
    cfg: &SynthConfig,
    date: NaiveDate,
    season: &[NaiveDate],
    events: &[NaiveDate],
) -> f64 {
    let idx = season.iter().position(|&d| d == date).unwrap() as f64;
    let tau = idx / (season.len() as f64 - 1.0);
    let mut line = cfg.melt_line_base_m + cfg.melt_line_amp_m * (std::f64::consts::PI * tau).sin();
    if events.contains(&date) {
        line *= cfg.event_boost_factor;
    }
    line
}

/// Dense truth melt field for one day.
fn truth_field(
    cfg: &SynthConfig,
    fields: &StaticFields,
    date: NaiveDate,
    season: &[NaiveDate],
    events: &[NaiveDate],
) -> Vec<f32> {
    let line = melt_line(cfg, date, season, events);
    let mut rng = day_rng(cfg.seed, SALT_TRUTH, date);
    fields
        .dem
        .iter()
        .zip(&fields.land)
        .map(|(&elev, &is_land)| {
            if !is_land {
                return 0.0;
            }
            let base = logistic((line - elev as f64) / cfg.melt_softness_m);
            (base + cfg.noise_sigma * normal(&mut rng)).clamp(0.0, 1.0) as f32
        })
        .collect()
}

fn pmw_winter_base(cfg: &SynthConfig, year: i32) -> Vec<f64> {
    let (w, h) = (cfg.grid.width, cfg.grid.height);
    let bw = w.div_ceil(cfg.pmw_block);
    let bh = h.div_ceil(cfg.pmw_block);
    let mut rng = ChaCha8Rng::seed_from_u64(mix(mix(cfg.seed, SALT_WINTER_BASE), year as u64));
    (0..(bw * bh) as usize)
        .map(|_| cfg.pmw_winter_kelvin - 10.0 + 20.0 * rng.gen::<f64>())
        .collect()
}

struct DayOutput {
    entries: Vec<ManifestEntry>,
    wrote_sar: bool,
}

/// Writes the full synthetic dataset under `root` and returns its manifest
/// and counts. Identical configurations produce byte-identical datasets.
pub fn generate_synthetic(cfg: &SynthConfig, root: &Path) -> Result<(Manifest, SynthSummary)> {
    cfg.validate()?;
    let grid = cfg.grid;
    for stream in [
        "dem",
        "landmask",
        "mar_wa1",
        "pmw_tb",
        "sar_target",
        "truth",
    ] {
        std::fs::create_dir_all(root.join(stream))?;
    }

    let fields = build_static(cfg);
    let events = cfg.event_days();
    let mut years = cfg.years.clone();
    years.sort_unstable();
    years.dedup();

    let mut entries = Vec::new();

    // Static streams, dated at the first season day.
    let first_day = NaiveDate::from_ymd_opt(years[0], 4, 1).unwrap();
    let dem_raster = Raster::new(grid, fields.dem.clone())?;
    save_raster(&root.join("dem/dem.mwbr"), &dem_raster)?;
    entries.push(ManifestEntry {
        stream: Stream::Dem,
        date: first_day,
        path: "dem/dem.mwbr".into(),
        grid,
        acquired_at: None,
    });
    let landmask = Raster::new(
        grid,
        fields
            .land
            .iter()
            .map(|&l| if l { 1.0 } else { 0.0 })
            .collect(),
    )?;
    save_raster(&root.join("landmask/landmask.mwbr"), &landmask)?;
    entries.push(ManifestEntry {
        stream: Stream::Landmask,
        date: first_day,
        path: "landmask/landmask.mwbr".into(),
        grid,
        acquired_at: None,
    });

    // Winter PMW images per year.
    let mut pmw_images = 0usize;
    for &year in &years {
        let base = pmw_winter_base(cfg, year);
        for date in pmw_winter_days(year) {
            let mut rng = day_rng(cfg.seed, SALT_PMW, date);
            let noise: Vec<f64> = (0..base.len()).map(|_| 1.5 * normal(&mut rng)).collect();
            let values =
                broadcast_blocks(&base, grid.width, grid.height, cfg.pmw_block, |bi, v| {
                    (v + noise[bi]) as f32
                });
            let path = format!("pmw_tb/{date}.mwbr");
            save_raster(&root.join(&path), &Raster::new(grid, values)?)?;
            entries.push(ManifestEntry {
                stream: Stream::PmwTb,
                date,
                path,
                grid,
                acquired_at: None,
            });
            pmw_images += 1;
        }
    }

    // Season days, processed in parallel; entry order is rebuilt from the
    // chronological day list afterwards.
    let mut jobs: Vec<(NaiveDate, Vec<NaiveDate>, bool, usize)> = Vec::new();
    let mut sar_counter = 0usize;
    for &year in &years {
        let season = season_days(year);
        for (i, &date) in season.iter().enumerate() {
            let is_sar = (i as u32).is_multiple_of(cfg.sar_revisit_days);
            let swath_idx = if is_sar {
                let idx = sar_counter % fields.swaths.len();
                sar_counter += 1;
                idx
            } else {
                0
            };
            jobs.push((date, season.clone(), is_sar, swath_idx));
        }
    }

    let day_outputs: Vec<DayOutput> = jobs
        .par_iter()
        .map(|(date, season, is_sar, swath_idx)| -> Result<DayOutput> {
            let date = *date;
            let mut out = DayOutput {
                entries: Vec::new(),
                wrote_sar: false,
            };
            let truth = truth_field(cfg, &fields, date, season, &events);

            let truth_path = format!("truth/{date}.mwbr");
            save_raster(&root.join(&truth_path), &Raster::new(grid, truth.clone())?)?;
            out.entries.push(ManifestEntry {
                stream: Stream::Truth,
                date,
                path: truth_path,
                grid,
                acquired_at: None,
            });

            // MAR-like liquid water content: block means of the truth with a
            // seasonal skew that runs high early and low late.
            let idx = season.iter().position(|&d| d == date).unwrap() as f64;
            let tau = idx / (season.len() as f64 - 1.0);
            let skew = 1.0 + 0.5 * (std::f64::consts::PI * tau).cos();
            let mar_blocks = block_means(&truth, grid.width, grid.height, cfg.mar_block);
            let mut rng = day_rng(cfg.seed, SALT_MAR, date);
            let mar_noise: Vec<f64> = (0..mar_blocks.len())
                .map(|_| 0.02 * normal(&mut rng))
                .collect();
            let mar_values = broadcast_blocks(
                &mar_blocks,
                grid.width,
                grid.height,
                cfg.mar_block,
                |bi, v| (cfg.mar_wa1_scale * (v * skew + mar_noise[bi]).max(0.0)) as f32,
            );
            let mar_path = format!("mar_wa1/{date}.mwbr");
            save_raster(&root.join(&mar_path), &Raster::new(grid, mar_values)?)?;
            out.entries.push(ManifestEntry {
                stream: Stream::MarWa1,
                date,
                path: mar_path,
                grid,
                acquired_at: None,
            });

            // PMW-like brightness temperature.
            let base = pmw_winter_base(cfg, date.year());
            let pmw_blocks = block_means(&truth, grid.width, grid.height, cfg.pmw_block);
            let mut rng = day_rng(cfg.seed, SALT_PMW, date);
            let pmw_noise: Vec<f64> = (0..pmw_blocks.len())
                .map(|_| 1.5 * normal(&mut rng))
                .collect();
            let pmw_values = broadcast_blocks(
                &pmw_blocks,
                grid.width,
                grid.height,
                cfg.pmw_block,
                |bi, v| (base[bi] + cfg.pmw_melt_gain_kelvin * v + pmw_noise[bi]) as f32,
            );
            let pmw_path = format!("pmw_tb/{date}.mwbr");
            save_raster(&root.join(&pmw_path), &Raster::new(grid, pmw_values)?)?;
            out.entries.push(ManifestEntry {
                stream: Stream::PmwTb,
                date,
                path: pmw_path,
                grid,
                acquired_at: None,
            });

            // Swath-masked melt target on revisit days: the dense truth
            // masked to the swath and the land.
            if *is_sar {
                let swath = &fields.swaths[*swath_idx];
                let values: Vec<f32> = truth
                    .iter()
                    .zip(swath.iter().zip(&fields.land))
                    .map(
                        |(&t, (&in_swath, &is_land))| {
                            if in_swath && is_land {
                                t
                            } else {
                                f32::NAN
                            }
                        },
                    )
                    .collect();
                let path = format!("sar_target/{date}.mwbr");
                save_raster(&root.join(&path), &Raster::new(grid, values)?)?;
                out.entries.push(ManifestEntry {
                    stream: Stream::SarTarget,
                    date,
                    path,
                    grid,
                    acquired_at: None,
                });
                out.wrote_sar = true;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let season_count = day_outputs.len();
    let sar_days = day_outputs.iter().filter(|o| o.wrote_sar).count();
    for out in day_outputs {
        entries.extend(out.entries);
    }
    pmw_images += season_count;

    let manifest = Manifest::new(entries);
    manifest.save(root)?;
    Ok((
        manifest,
        SynthSummary {
            season_days: season_count,
            sar_days,
            pmw_images,
            mar_images: season_count,
        },
    ))
}
