//! Monthly elevation-band melt model.
//!
//! The prediction at a pixel is `tanh_hat(a_m * elevation + b_m, c)`: a flat
//! top with tanh-shaped shoulders that is close to one inside a monthly
//! elevation band and close to zero outside it. The six (a, b) pairs for
//! April through September are the only free parameters; the shoulder
//! sharpness `c` is a fixed hyperparameter.
//!
//! Fitting minimizes the valid-pixel MSE with stochastic gradient descent
//! over tiles. Elevations are standardized internally so the published
//! learning rate works on meter-scaled inputs; the returned parameters are
//! in raw elevation units.

use chrono::Datelike;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{apply_landmask, Raster};
use crate::series::DatedRaster;
use crate::tiling::{sample_tiles, TileSpec};

pub const SEASON_MONTHS: [u32; 6] = [4, 5, 6, 7, 8, 9];

/// The hat function: 0.5 (tanh(c + z) + tanh(c - z)). Symmetric in `z`,
/// peaks at tanh(c) for z = 0, and falls to zero as |z| grows.
pub fn tanh_hat(z: f64, c: f64) -> f64 {
    0.5 * ((c + z).tanh() + (c - z).tanh())
}

#[inline]
fn sech2(x: f64) -> f64 {
    let c = x.cosh();
    1.0 / (c * c)
}

/// Analytic d/dz of [`tanh_hat`].
pub fn tanh_hat_deriv(z: f64, c: f64) -> f64 {
    0.5 * (sech2(c + z) - sech2(c - z))
}

/// Per-month band parameters. Index 0 is April, index 5 is September.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemBandParams {
    /// Shoulder sharpness; fixed, not counted as a free parameter.
    pub c: f64,
    /// Slope per month in 1/meters.
    pub slope: [f64; 6],
    /// Dimensionless intercept per month.
    pub intercept: [f64; 6],
}

impl Default for DemBandParams {
    fn default() -> Self {
        DemBandParams {
            c: 4.0,
            slope: [0.0; 6],
            intercept: [0.0; 6],
        }
    }
}

impl DemBandParams {
    pub fn month_index(month: u32) -> Result<usize> {
        if (4..=9).contains(&month) {
            Ok((month - 4) as usize)
        } else {
            Err(Error::MonthOutOfSeason { month })
        }
    }
}

/// Melt fraction for one month from the static DEM.
pub fn threshold_dem_predict(
    dem: &Raster,
    params: &DemBandParams,
    month: u32,
    landmask: &Raster,
) -> Result<Raster> {
    let idx = DemBandParams::month_index(month)?;
    let a = params.slope[idx];
    let b = params.intercept[idx];
    let c = params.c;
    let pred = dem.map(|elev| {
        if elev.is_nan() {
            f32::NAN
        } else {
            tanh_hat(a * elev as f64 + b, c).clamp(0.0, 1.0) as f32
        }
    });
    apply_landmask(&pred, landmask)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DemFitHyper {
    pub c: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub plateau_patience: usize,
    pub lr_decay: f64,
    /// Epoch-loss improvement below this counts as a plateau.
    pub plateau_eps: f64,
    /// Edge length of the sampled square training tiles.
    pub tile: u32,
    pub seed: u64,
    /// Explicit starting point; otherwise a melt-elevation-quantile guess is
    /// derived from the training targets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<DemBandParams>,
}

impl Default for DemFitHyper {
    fn default() -> Self {
        DemFitHyper {
            c: 4.0,
            epochs: 22,
            batch_size: 16,
            lr0: 10.0,
            plateau_patience: 5,
            lr_decay: 0.1,
            plateau_eps: 1e-6,
            tile: 64,
            seed: 0,
            init: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DemFitResult {
    pub params: DemBandParams,
    pub initial_loss: f64,
    pub final_loss: f64,
    /// Full-training-set MSE per epoch; entry 0 is the initialization.
    pub epoch_losses: Vec<f64>,
    /// Epoch indices at which the learning rate was reduced.
    pub lr_reductions: Vec<usize>,
    /// Months of the fitted season that had no training imagery and kept
    /// their initialization.
    pub unfitted_months: Vec<u32>,
}

#[derive(Clone, Copy)]
struct BandState {
    a: [f64; 6],
    b: [f64; 6],
}

/// Quantile-band starting point: per month, a band spanning the 5th to 95th
/// percentile of elevations observed melting; months without melt fall back
/// to a band covering everything below the mean elevation.
fn quantile_init(dem: &Raster, targets: &[DatedRaster], c: f64, mu: f64, sigma: f64) -> BandState {
    let mut state = BandState {
        a: [0.0; 6],
        b: [0.0; 6],
    };
    for (i, &month) in SEASON_MONTHS.iter().enumerate() {
        let mut melt_elevs: Vec<f64> = Vec::new();
        for dr in targets.iter().filter(|dr| dr.date.month() == month) {
            // Stride the scan so the init stays cheap on large rasters.
            for (&t, &x) in dr.raster.values().iter().zip(dem.values()).step_by(7) {
                if !t.is_nan() && !x.is_nan() && t > 0.1 {
                    melt_elevs.push(x as f64);
                }
            }
        }
        let (lo, hi) = if melt_elevs.len() < 16 {
            // Generic fallback: melt below the mean elevation.
            (mu - 4.0 * sigma, mu)
        } else {
            melt_elevs.sort_by(|p, q| p.partial_cmp(q).unwrap());
            (
                melt_elevs[melt_elevs.len() / 20],
                melt_elevs[melt_elevs.len() - 1 - melt_elevs.len() / 20],
            )
        };
        let width = (hi - lo).max(1e-3);
        state.a[i] = 2.0 * c / width;
        state.b[i] = -state.a[i] * (lo + hi) / 2.0;
    }
    state
}

/// Full-training-set MSE with the forward pass rounded through f32 exactly
/// like the predict op, so targets equal to stored predictions give a zero
/// residual.
fn epoch_loss(dem: &Raster, images: &[(usize, &DatedRaster)], state: &BandState, c: f64) -> f64 {
    let mut sse = 0.0f64;
    let mut n = 0usize;
    for &(mi, dr) in images {
        let (a, b) = (state.a[mi], state.b[mi]);
        for (&t, &x) in dr.raster.values().iter().zip(dem.values()) {
            if t.is_nan() || x.is_nan() {
                continue;
            }
            let d = (tanh_hat(a * x as f64 + b, c) as f32 - t) as f64;
            sse += d * d;
            n += 1;
        }
    }
    if n == 0 {
        f64::NAN
    } else {
        sse / n as f64
    }
}

/// Fits the monthly bands to training targets by SGD over sampled tiles.
pub fn fit_threshold_dem(
    dem: &Raster,
    targets: &[DatedRaster],
    hyper: &DemFitHyper,
) -> Result<DemFitResult> {
    if targets.is_empty() {
        return Err(Error::EmptyInput("threshold-DEM training targets"));
    }
    if hyper.batch_size == 0 || hyper.epochs == 0 || hyper.lr0 <= 0.0 || hyper.lr0.is_nan() {
        return Err(Error::InvalidParameter(
            "DEM fit needs positive epochs, batch size, and learning rate".into(),
        ));
    }
    let grid = dem.grid();
    let mut images: Vec<(usize, &DatedRaster)> = Vec::with_capacity(targets.len());
    for dr in targets {
        dr.raster.same_grid(dem)?;
        images.push((DemBandParams::month_index(dr.date.month())?, dr));
    }

    // Standardize elevations over valid DEM pixels.
    let valid: Vec<f64> = dem
        .values()
        .iter()
        .filter(|v| !v.is_nan())
        .map(|&v| v as f64)
        .collect();
    if valid.is_empty() {
        return Err(Error::NoValidPixels);
    }
    let mu = valid.iter().sum::<f64>() / valid.len() as f64;
    let var = valid.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / valid.len() as f64;
    let sigma = var.sqrt();
    if sigma == 0.0 {
        return Err(Error::ZeroVariance { channel: 0 });
    }

    let c = hyper.c;
    let mut state = match &hyper.init {
        Some(p) => BandState {
            a: p.slope,
            b: p.intercept,
        },
        None => quantile_init(dem, targets, c, mu, sigma),
    };

    let tile = hyper.tile.max(1).min(grid.width).min(grid.height);
    let spec = TileSpec::new(tile, tile, 1, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);

    let mut losses = vec![epoch_loss(dem, &images, &state, c)];
    let mut best = (losses[0], state);
    let mut lr = hyper.lr0;
    let mut stall = 0usize;
    let mut reductions = Vec::new();
    let width = grid.width as usize;

    for epoch in 0..hyper.epochs {
        let origins = sample_tiles(
            grid,
            &spec,
            images.len(),
            hyper.seed.wrapping_add(epoch as u64 + 1),
        )?;
        let mut order: Vec<usize> = (0..images.len()).collect();
        order.shuffle(&mut rng);

        for batch in order.chunks(hyper.batch_size) {
            // Gradients in standardized-elevation coordinates, where the
            // published learning rate is usable.
            let mut grad_a = [0.0f64; 6];
            let mut grad_b = [0.0f64; 6];
            for &img in batch {
                let (mi, dr) = images[img];
                let (row0, col0) = origins[img];
                let (a, b) = (state.a[mi], state.b[mi]);
                let mut ga = 0.0f64;
                let mut gb = 0.0f64;
                let mut n = 0usize;
                for r in row0..row0 + tile {
                    let base = r as usize * width;
                    for i in base + col0 as usize..base + (col0 + tile) as usize {
                        let t = dr.raster.values()[i];
                        let x = dem.values()[i];
                        if t.is_nan() || x.is_nan() {
                            continue;
                        }
                        let u = a * x as f64 + b;
                        let resid = (tanh_hat(u, c) as f32 - t) as f64;
                        let slope = tanh_hat_deriv(u, c);
                        let zeta = (x as f64 - mu) / sigma;
                        ga += 2.0 * resid * slope * zeta;
                        gb += 2.0 * resid * slope;
                        n += 1;
                    }
                }
                if n > 0 {
                    grad_a[mi] += ga / n as f64;
                    grad_b[mi] += gb / n as f64;
                }
            }
            // Map the standardized-coordinate step back to raw units:
            // delta_a = -lr g_a / sigma, delta_b = -lr (g_b - g_a mu / sigma).
            let scale = lr / batch.len() as f64;
            for i in 0..6 {
                state.a[i] -= scale * grad_a[i] / sigma;
                state.b[i] -= scale * (grad_b[i] - grad_a[i] * mu / sigma);
            }
        }

        let loss = epoch_loss(dem, &images, &state, c);
        losses.push(loss);
        if loss < best.0 - hyper.plateau_eps {
            best = (loss, state);
            stall = 0;
        } else {
            if loss < best.0 {
                best = (loss, state);
            }
            stall += 1;
            if stall >= hyper.plateau_patience {
                lr *= hyper.lr_decay;
                reductions.push(epoch + 1);
                stall = 0;
            }
        }
    }

    let fitted_months: std::collections::BTreeSet<usize> =
        images.iter().map(|&(mi, _)| mi).collect();
    let unfitted: Vec<u32> = SEASON_MONTHS
        .iter()
        .enumerate()
        .filter(|(i, _)| !fitted_months.contains(i))
        .map(|(_, &m)| m)
        .collect();

    Ok(DemFitResult {
        params: DemBandParams {
            c,
            slope: best.1.a,
            intercept: best.1.b,
        },
        initial_loss: losses[0],
        final_loss: best.0,
        epoch_losses: losses,
        lr_reductions: reductions,
        unfitted_months: unfitted,
    })
}
