//! Independent oracles for the metric and model implementations: naive
//! double-loop reductions and a dense windowed SSIM, kept free of the
//! library's fast paths.

// Each integration-test binary compiles this module separately and uses a
// different subset of it.
#![allow(dead_code)]

use chrono::NaiveDate;
use meltkit_core::metrics::SsimConfig;
use meltkit_core::raster::{Grid, Raster};
use meltkit_core::series::DatedRaster;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn date(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

pub fn day_n(n: u64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2019, 4, 1).unwrap() + chrono::Duration::days(n as i64)
}

/// Random pair with NaN gaps mostly in the target and a few in the
/// prediction.
pub fn random_masked_pair(
    seed: u64,
    width: u32,
    height: u32,
    target_nan: f64,
    pred_nan: f64,
) -> (Raster, Raster) {
    let grid = Grid::new(width, height, 100.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.len();
    let t: Vec<f32> = (0..n)
        .map(|_| {
            if rng.gen_bool(target_nan) {
                f32::NAN
            } else {
                rng.gen_range(0.0..1.0)
            }
        })
        .collect();
    let p: Vec<f32> = (0..n)
        .map(|_| {
            if rng.gen_bool(pred_nan) {
                f32::NAN
            } else {
                rng.gen_range(0.0..1.0)
            }
        })
        .collect();
    (Raster::new(grid, t).unwrap(), Raster::new(grid, p).unwrap())
}

fn valid(t: f32, p: f32) -> bool {
    !t.is_nan() && !p.is_nan()
}

/// Pooled L^p error and its weighted per-image sigma, the slow way.
pub fn oracle_spatial_error(pairs: &[(&Raster, &Raster)], p: u32) -> (f64, f64) {
    let mut per_image = Vec::new();
    let mut total_sum = 0.0f64;
    let mut total_n = 0usize;
    for &(t, pr) in pairs {
        let mut sum = 0.0f64;
        let mut n = 0usize;
        for (&tv, &pv) in t.values().iter().zip(pr.values()) {
            if valid(tv, pv) {
                let d = (tv as f64 - pv as f64).abs();
                sum += if p == 1 { d } else { d * d };
                n += 1;
            }
        }
        per_image.push((sum, n));
        total_sum += sum;
        total_n += n;
    }
    let err = total_sum / total_n as f64;
    let mut var = 0.0f64;
    for &(sum, n) in &per_image {
        if n > 0 {
            let m = sum / n as f64;
            var += n as f64 * (m - err) * (m - err);
        }
    }
    (err, (var / total_n as f64).sqrt())
}

pub struct OracleClassification {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Accuracy pooled over valid pixels; precision/recall as per-image ratios
/// weighted by valid counts with empty denominators contributing zero.
pub fn oracle_classification(pairs: &[(&Raster, &Raster)], threshold: f32) -> OracleClassification {
    let mut n_total = 0usize;
    let mut correct = 0usize;
    let mut prec_sum = 0.0f64;
    let mut rec_sum = 0.0f64;
    for &(t, p) in pairs {
        let mut n = 0usize;
        let mut tp = 0usize;
        let mut pred_pos = 0usize;
        let mut act_pos = 0usize;
        for (&tv, &pv) in t.values().iter().zip(p.values()) {
            if !valid(tv, pv) {
                continue;
            }
            n += 1;
            let a = tv > threshold;
            let b = pv > threshold;
            if a == b {
                correct += 1;
            }
            if a && b {
                tp += 1;
            }
            if b {
                pred_pos += 1;
            }
            if a {
                act_pos += 1;
            }
        }
        n_total += n;
        if pred_pos > 0 {
            prec_sum += n as f64 * tp as f64 / pred_pos as f64;
        }
        if act_pos > 0 {
            rec_sum += n as f64 * tp as f64 / act_pos as f64;
        }
    }
    let accuracy = correct as f64 / n_total as f64;
    let precision = prec_sum / n_total as f64;
    let recall = rec_sum / n_total as f64;
    let f1 = if precision > 0.0 && recall > 0.0 {
        2.0 / (1.0 / precision + 1.0 / recall)
    } else {
        0.0
    };
    OracleClassification {
        accuracy,
        precision,
        recall,
        f1,
    }
}

/// Weighted, clipped R^2 the slow way.
pub fn oracle_r2(pairs: &[(&Raster, &Raster)]) -> f64 {
    let mut num = 0.0f64;
    let mut n_total = 0usize;
    for &(t, p) in pairs {
        let mut vals = Vec::new();
        for (&tv, &pv) in t.values().iter().zip(p.values()) {
            if valid(tv, pv) {
                vals.push((tv as f64, pv as f64));
            }
        }
        n_total += vals.len();
        if vals.is_empty() {
            continue;
        }
        let mean = vals.iter().map(|&(t, _)| t).sum::<f64>() / vals.len() as f64;
        let ss_res: f64 = vals.iter().map(|&(t, p)| (t - p) * (t - p)).sum();
        let ss_tot: f64 = vals.iter().map(|&(t, _)| (t - mean) * (t - mean)).sum();
        let r2 = if ss_tot == 0.0 {
            0.0
        } else {
            (1.0 - ss_res / ss_tot).max(-1.0)
        };
        num += vals.len() as f64 * r2;
    }
    num / n_total as f64
}

/// Dense double-loop SSIM map with explicit 2-D Gaussian window weights and
/// bounce reflection, independent of the separable fast path.
pub fn oracle_ssim_map(target: &Raster, pred: &Raster, cfg: &SsimConfig) -> Vec<f64> {
    let w = target.width() as usize;
    let h = target.height() as usize;
    let size = cfg.window_size;
    let center = (size as f64 - 1.0) / 2.0;
    let mut taps: Vec<f64> = (0..size)
        .map(|j| {
            let d = j as f64 - center;
            (-d * d / (2.0 * cfg.window_sigma * cfg.window_sigma)).exp()
        })
        .collect();
    let s: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= s;
    }

    let zero_fill = |r: &Raster, other: &Raster| -> Vec<f64> {
        r.values()
            .iter()
            .zip(other.values())
            .map(|(&v, &o)| {
                if v.is_nan() || o.is_nan() {
                    0.0
                } else {
                    v as f64
                }
            })
            .collect()
    };
    let x = zero_fill(target, pred);
    let y = zero_fill(pred, target);

    let reflect = |i: isize, n: usize| -> usize {
        let period = 2 * (n as isize - 1);
        let mut m = i.rem_euclid(period);
        if m >= n as isize {
            m = period - m;
        }
        m as usize
    };

    let half = (size / 2) as isize;
    let mut map = vec![0.0f64; w * h];
    for row in 0..h {
        for col in 0..w {
            let mut mx = 0.0f64;
            let mut my = 0.0f64;
            let mut exx = 0.0f64;
            let mut eyy = 0.0f64;
            let mut exy = 0.0f64;
            for (kj, &wr) in taps.iter().enumerate() {
                let rr = reflect(row as isize + kj as isize - half, h);
                for (ki, &wc) in taps.iter().enumerate() {
                    let cc = reflect(col as isize + ki as isize - half, w);
                    let weight = wr * wc;
                    let xv = x[rr * w + cc];
                    let yv = y[rr * w + cc];
                    mx += weight * xv;
                    my += weight * yv;
                    exx += weight * xv * xv;
                    eyy += weight * yv * yv;
                    exy += weight * xv * yv;
                }
            }
            let var_x = exx - mx * mx;
            let var_y = eyy - my * my;
            let cov = exy - mx * my;
            map[row * w + col] = ((2.0 * mx * my + cfg.c1) * (2.0 * cov + cfg.c2))
                / ((mx * mx + my * my + cfg.c1) * (var_x + var_y + cfg.c2));
        }
    }
    map
}

/// Pooled masked SSIM from the dense oracle map.
pub fn oracle_masked_ssim(pairs: &[(&Raster, &Raster)], cfg: &SsimConfig) -> f64 {
    let mut sum = 0.0f64;
    let mut n = 0usize;
    for &(t, p) in pairs {
        let map = oracle_ssim_map(t, p, cfg);
        for (i, (&tv, &pv)) in t.values().iter().zip(p.values()).enumerate() {
            if valid(tv, pv) {
                sum += map[i];
                n += 1;
            }
        }
    }
    sum / n as f64
}

/// Brute-force running-mean prediction over explicit neighbor images.
pub fn oracle_running_mean(neighbors: &[&Raster]) -> Raster {
    let grid = neighbors[0].grid();
    Raster::from_fn(grid, |r, c| {
        let mut sum = 0.0f64;
        let mut n = 0usize;
        for img in neighbors {
            let v = img.get(r, c);
            if !v.is_nan() {
                sum += v as f64;
                n += 1;
            }
        }
        if n == 0 {
            f32::NAN
        } else {
            (sum / n as f64) as f32
        }
    })
}

pub fn as_pairs<'a>(
    targets: &'a [DatedRaster],
    preds: &'a [DatedRaster],
) -> Vec<(&'a Raster, &'a Raster)> {
    targets
        .iter()
        .zip(preds.iter())
        .map(|(t, p)| (&t.raster, &p.raster))
        .collect()
}
