//! Masked structural similarity.
//!
//! Invalid pixels are set to zero in both images before the windowed
//! statistics are computed, and the resulting per-pixel SSIM map is then
//! averaged over valid pixel locations only, weighting images by their valid
//! counts. Zero-filling raises scores near mask borders but is fair for
//! model intercomparison because mask geometry does not depend on the model.
//!
//! The sliding window uses Gaussian weights with reflection padding. For the
//! default even window of 72 taps the window covers integer offsets
//! `-36 ..= 35` around the output pixel with the Gaussian sampled at
//! half-integer positions, keeping the weights symmetric; see
//! [`crate::conv::gaussian_kernel`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conv::{convolve_separable, gaussian_kernel};
use crate::error::{Error, Result};
use crate::metrics::{align, weighted_sigma};
use crate::raster::Raster;
use crate::series::DatedRaster;

/// Window shape and stabilizing constants.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SsimConfig {
    pub window_size: usize,
    pub window_sigma: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        SsimConfig {
            window_size: 72,
            window_sigma: 10.0,
            c1: 1e-4,
            c2: 9e-4,
        }
    }
}

impl SsimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_size < 3 {
            return Err(Error::InvalidParameter(format!(
                "SSIM window size {} below minimum 3",
                self.window_size
            )));
        }
        let bad = |v: f64| v <= 0.0 || v.is_nan();
        if bad(self.window_sigma) || bad(self.c1) || bad(self.c2) {
            return Err(Error::InvalidParameter(
                "SSIM window sigma and constants must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Per-pixel SSIM map of a zero-filled pair, same size as the input grid.
pub fn ssim_map(target: &Raster, pred: &Raster, cfg: &SsimConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    target.same_grid(pred)?;
    let w = target.width() as usize;
    let h = target.height() as usize;
    if w < 2 || h < 2 {
        return Err(Error::RasterTooSmall {
            width: target.width(),
            height: target.height(),
        });
    }

    let n = w * h;
    let mut x = vec![0.0f64; n];
    let mut y = vec![0.0f64; n];
    let mut xx = vec![0.0f64; n];
    let mut yy = vec![0.0f64; n];
    let mut xy = vec![0.0f64; n];
    for (i, (&tv, &pv)) in target.values().iter().zip(pred.values()).enumerate() {
        if tv.is_nan() || pv.is_nan() {
            continue;
        }
        let t = tv as f64;
        let p = pv as f64;
        x[i] = t;
        y[i] = p;
        xx[i] = t * t;
        yy[i] = p * p;
        xy[i] = t * p;
    }

    let kernel = gaussian_kernel(cfg.window_size, cfg.window_sigma);
    let mu_x = convolve_separable(&x, w, h, &kernel);
    let mu_y = convolve_separable(&y, w, h, &kernel);
    let e_xx = convolve_separable(&xx, w, h, &kernel);
    let e_yy = convolve_separable(&yy, w, h, &kernel);
    let e_xy = convolve_separable(&xy, w, h, &kernel);

    let mut map = vec![0.0f64; n];
    for i in 0..n {
        let mx = mu_x[i];
        let my = mu_y[i];
        let var_x = e_xx[i] - mx * mx;
        let var_y = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        map[i] = ((2.0 * mx * my + cfg.c1) * (2.0 * cov + cfg.c2))
            / ((mx * mx + my * my + cfg.c1) * (var_x + var_y + cfg.c2));
    }
    Ok(map)
}

/// Sum of the SSIM map over valid pixel locations plus the valid count, the
/// per-image partial from which the pooled score is assembled.
pub fn ssim_pair_sum(target: &Raster, pred: &Raster, cfg: &SsimConfig) -> Result<(f64, usize)> {
    let map = ssim_map(target, pred, cfg)?;
    let mut sum = 0.0f64;
    let mut n = 0usize;
    for (i, (&tv, &pv)) in target.values().iter().zip(pred.values()).enumerate() {
        if tv.is_nan() || pv.is_nan() {
            continue;
        }
        sum += map[i];
        n += 1;
    }
    Ok((sum, n))
}

/// Pooled masked SSIM over a series pair and its weighted per-image standard
/// deviation.
pub fn masked_ssim(
    targets: &[DatedRaster],
    preds: &[DatedRaster],
    cfg: &SsimConfig,
) -> Result<(f64, f64)> {
    let pairs = align(targets, preds)?;
    let partials: Vec<(f64, usize)> = pairs
        .par_iter()
        .map(|(_, t, p)| ssim_pair_sum(t, p, cfg))
        .collect::<Result<Vec<_>>>()?;
    let total: usize = partials.iter().map(|&(_, n)| n).sum();
    if total == 0 {
        return Err(Error::NoValidPixels);
    }
    let pooled = partials.iter().map(|&(s, _)| s).sum::<f64>() / total as f64;
    let means: Vec<(f64, usize)> = partials
        .iter()
        .filter(|&&(_, n)| n > 0)
        .map(|&(s, n)| (s / n as f64, n))
        .collect();
    Ok((pooled, weighted_sigma(&means, pooled)))
}
