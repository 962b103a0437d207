//! Masked evaluation metrics over aligned target/prediction series.
//!
//! Conventions shared by every metric here:
//!
//! * A pixel counts as valid only when it is non-NaN in **both** the target
//!   and the prediction. Targets carry the observation mask; predictions are
//!   dense after landmasking, so on real data this reduces to the target
//!   mask.
//! * Error metrics pool over valid pixels, weighting each image by its valid
//!   count `n_valid`. The per-image standard deviations weight the squared
//!   deviation of each image mean by `n_valid` as well.
//! * Everything accumulates in f64 from per-image partial sums, reduced in
//!   date order, so results do not depend on the number of worker threads.

pub mod ssim;

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::series::DatedRaster;

pub use ssim::{masked_ssim, ssim_map, SsimConfig};

/// Melt/no-melt cut for the classification metrics. Classes use a strict
/// `value > MELT_THRESHOLD` comparison.
pub const MELT_THRESHOLD: f64 = 0.1;

/// Pairs two date-sorted series, requiring identical date sets and grids.
pub(crate) fn align<'a>(
    targets: &'a [DatedRaster],
    preds: &'a [DatedRaster],
) -> Result<Vec<(NaiveDate, &'a Raster, &'a Raster)>> {
    let mut out = Vec::with_capacity(targets.len());
    let mut ti = targets.iter();
    let mut pi = preds.iter();
    loop {
        match (ti.next(), pi.next()) {
            (None, None) => break,
            (Some(t), None) => return Err(Error::DateMismatch { date: t.date }),
            (None, Some(p)) => return Err(Error::DateMismatch { date: p.date }),
            (Some(t), Some(p)) => {
                if t.date != p.date {
                    return Err(Error::DateMismatch {
                        date: t.date.min(p.date),
                    });
                }
                t.raster.same_grid(&p.raster)?;
                out.push((t.date, &t.raster, &p.raster));
            }
        }
    }
    Ok(out)
}

/// Weighted standard deviation of per-image means around the pooled value,
/// with weights `n_valid / N_valid`.
pub fn weighted_sigma(per_image: &[(f64, usize)], pooled: f64) -> f64 {
    let total: usize = per_image.iter().map(|&(_, n)| n).sum();
    if total == 0 {
        return 0.0;
    }
    let var = per_image
        .iter()
        .filter(|&&(_, n)| n > 0)
        .map(|&(mean, n)| n as f64 * (mean - pooled) * (mean - pooled))
        .sum::<f64>()
        / total as f64;
    var.max(0.0).sqrt()
}

/// Spatial mean L^p error per valid pixel, pooled over the series, and the
/// weighted per-image standard deviation. `p = 1` gives the MAE, `p = 2` the
/// MSE.
pub fn spatial_error(targets: &[DatedRaster], preds: &[DatedRaster], p: u32) -> Result<(f64, f64)> {
    if p != 1 && p != 2 {
        return Err(Error::InvalidParameter(format!(
            "exponent p must be 1 or 2, got {p}"
        )));
    }
    let pairs = align(targets, preds)?;
    let partials: Vec<(f64, usize)> = pairs
        .par_iter()
        .map(|(_, t, p_r)| {
            let mut sum = 0.0f64;
            let mut n = 0usize;
            for (&tv, &pv) in t.values().iter().zip(p_r.values()) {
                if tv.is_nan() || pv.is_nan() {
                    continue;
                }
                let d = (tv as f64 - pv as f64).abs();
                sum += if p == 1 { d } else { d * d };
                n += 1;
            }
            (sum, n)
        })
        .collect();
    let total: usize = partials.iter().map(|&(_, n)| n).sum();
    if total == 0 {
        return Err(Error::NoValidPixels);
    }
    let err = partials.iter().map(|&(s, _)| s).sum::<f64>() / total as f64;
    let means: Vec<(f64, usize)> = partials
        .iter()
        .filter(|&&(_, n)| n > 0)
        .map(|&(s, n)| (s / n as f64, n))
        .collect();
    Ok((err, weighted_sigma(&means, err)))
}

/// RMSE and PSNR derived from an MSE. The maximum signal value is 1, so
/// `psnr = 10 log10(1 / mse)` in dB. A zero MSE reports RMSE 0 and an
/// infinite PSNR marker rather than failing.
pub fn rmse_psnr(mse: f64) -> (f64, f64) {
    debug_assert!(mse >= 0.0);
    if mse == 0.0 {
        (0.0, f64::INFINITY)
    } else {
        (mse.sqrt(), 10.0 * (1.0 / mse).log10())
    }
}

/// Classification scores at a melt threshold.
#[derive(Clone, Copy, Debug)]
pub struct ClassificationScores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub sigma_acc: f64,
    /// Precision from pooled confusion counts. Diagnostic only: the reported
    /// `precision` weights per-image ratios by valid counts instead.
    pub pooled_precision: f64,
    /// Recall from pooled confusion counts; same caveat as `pooled_precision`.
    pub pooled_recall: f64,
}

#[derive(Clone, Copy, Debug, Default)]
struct Confusion {
    n: usize,
    tp: usize,
    fp: usize,
    fn_: usize,
    tn: usize,
}

impl Confusion {
    fn of_pair(t: &Raster, p: &Raster, threshold: f64) -> Confusion {
        // Classify in the data's f32 domain, so a stored 0.10 does not leak
        // above a 0.1 threshold through f64 promotion.
        let threshold = threshold as f32;
        let mut c = Confusion::default();
        for (&tv, &pv) in t.values().iter().zip(p.values()) {
            if tv.is_nan() || pv.is_nan() {
                continue;
            }
            c.n += 1;
            let actual = tv > threshold;
            let predicted = pv > threshold;
            match (actual, predicted) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    fn correct(&self) -> usize {
        self.tp + self.tn
    }

    fn precision(&self) -> f64 {
        ratio_or_zero(self.tp, self.tp + self.fp)
    }

    fn recall(&self) -> f64 {
        ratio_or_zero(self.tp, self.tp + self.fn_)
    }
}

fn ratio_or_zero(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic_mean(a: f64, b: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        0.0
    } else {
        2.0 / (1.0 / a + 1.0 / b)
    }
}

fn combine_classification(confusions: &[Confusion]) -> Result<ClassificationScores> {
    let total: usize = confusions.iter().map(|c| c.n).sum();
    if total == 0 {
        return Err(Error::NoValidPixels);
    }
    let nf = total as f64;
    let accuracy = confusions.iter().map(|c| c.correct()).sum::<usize>() as f64 / nf;
    // Per-image precision/recall ratios combined with weights n_valid/N_valid.
    // Images with an empty denominator contribute zero to the weighted sum.
    let precision = confusions
        .iter()
        .map(|c| c.n as f64 * c.precision())
        .sum::<f64>()
        / nf;
    let recall = confusions
        .iter()
        .map(|c| c.n as f64 * c.recall())
        .sum::<f64>()
        / nf;
    let acc_means: Vec<(f64, usize)> = confusions
        .iter()
        .filter(|c| c.n > 0)
        .map(|c| (c.correct() as f64 / c.n as f64, c.n))
        .collect();
    let tp: usize = confusions.iter().map(|c| c.tp).sum();
    let fp: usize = confusions.iter().map(|c| c.fp).sum();
    let fn_: usize = confusions.iter().map(|c| c.fn_).sum();
    Ok(ClassificationScores {
        accuracy,
        precision,
        recall,
        f1: harmonic_mean(precision, recall),
        sigma_acc: weighted_sigma(&acc_means, accuracy),
        pooled_precision: ratio_or_zero(tp, tp + fp),
        pooled_recall: ratio_or_zero(tp, tp + fn_),
    })
}

/// Accuracy, precision, recall, and F1 at the melt threshold. Accuracy pools
/// all valid pixels; precision and recall combine per-image ratios weighted
/// by valid counts, and F1 is the harmonic mean of the combined values.
pub fn classification_metrics(
    targets: &[DatedRaster],
    preds: &[DatedRaster],
    threshold: f64,
) -> Result<ClassificationScores> {
    let pairs = align(targets, preds)?;
    let confusions: Vec<Confusion> = pairs
        .par_iter()
        .map(|(_, t, p)| Confusion::of_pair(t, p, threshold))
        .collect();
    combine_classification(&confusions)
}

/// Per-image R^2 against the image's valid-pixel target mean, clipped below
/// at -1, combined with weights `n_valid / N_valid`. An image whose valid
/// targets are all identical contributes zero, the same convention as an
/// all-invalid image.
fn r2_of_pair(t: &Raster, p: &Raster) -> (f64, usize) {
    let mut n = 0usize;
    let mut t_sum = 0.0f64;
    let mut ss_res = 0.0f64;
    for (&tv, &pv) in t.values().iter().zip(p.values()) {
        if tv.is_nan() || pv.is_nan() {
            continue;
        }
        n += 1;
        t_sum += tv as f64;
        let d = tv as f64 - pv as f64;
        ss_res += d * d;
    }
    if n == 0 {
        return (0.0, 0);
    }
    let mean = t_sum / n as f64;
    let mut ss_tot = 0.0f64;
    for (&tv, &pv) in t.values().iter().zip(p.values()) {
        if tv.is_nan() || pv.is_nan() {
            continue;
        }
        let d = tv as f64 - mean;
        ss_tot += d * d;
    }
    if ss_tot == 0.0 {
        return (0.0, n);
    }
    ((1.0 - ss_res / ss_tot).max(-1.0), n)
}

pub fn r_squared(targets: &[DatedRaster], preds: &[DatedRaster]) -> Result<f64> {
    let pairs = align(targets, preds)?;
    let partials: Vec<(f64, usize)> = pairs.par_iter().map(|(_, t, p)| r2_of_pair(t, p)).collect();
    let total: usize = partials.iter().map(|&(_, n)| n).sum();
    if total == 0 {
        return Err(Error::NoValidPixels);
    }
    Ok(partials.iter().map(|&(r2, n)| n as f64 * r2).sum::<f64>() / total as f64)
}

/// Mean meltwater fraction per calendar month, pooled across years. Every
/// image weighs equally within its month regardless of valid count; images
/// with no valid pixels are skipped. Months without images are absent.
pub fn monthly_mean_fraction(preds: &[DatedRaster]) -> BTreeMap<u32, f64> {
    let mut sums: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for dr in preds {
        let mut sum = 0.0f64;
        let mut n = 0usize;
        for &v in dr.raster.values() {
            if !v.is_nan() {
                sum += v as f64;
                n += 1;
            }
        }
        if n == 0 {
            continue;
        }
        let e = sums.entry(dr.date.month()).or_insert((0.0, 0));
        e.0 += sum / n as f64;
        e.1 += 1;
    }
    sums.into_iter()
        .map(|(m, (s, k))| (m, s / k as f64))
        .collect()
}

/// Total melt-covered area per day in km^2: the sum of valid fractions times
/// the cell area.
pub fn melt_extent_timeseries(preds: &[DatedRaster]) -> Vec<(NaiveDate, f64)> {
    preds
        .iter()
        .map(|dr| {
            let cell_km = dr.raster.cell_size_m() as f64 / 1000.0;
            let area: f64 = dr
                .raster
                .values()
                .iter()
                .filter(|v| !v.is_nan())
                .map(|&v| v as f64)
                .sum::<f64>()
                * cell_km
                * cell_km;
            (dr.date, area)
        })
        .collect()
}

/// Knobs for a full report.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ReportConfig {
    pub ssim: SsimConfig,
    pub melt_threshold: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            ssim: SsimConfig::default(),
            melt_threshold: MELT_THRESHOLD,
        }
    }
}

/// Per-image breakdown carried inside a report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImageMetrics {
    pub date: NaiveDate,
    pub n_valid: usize,
    pub mae: f64,
    pub mse: f64,
    pub accuracy: f64,
    pub ssim: f64,
}

/// Every score of the results tables, for one model over one evaluation set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricReport {
    pub n_images: usize,
    pub n_valid_total: usize,
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    #[serde(with = "psnr_serde")]
    pub psnr_db: f64,
    pub ssim: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub r2: f64,
    pub sigma_mae: f64,
    pub sigma_mse: f64,
    pub sigma_acc: f64,
    pub sigma_ssim: f64,
    pub pooled_precision: f64,
    pub pooled_recall: f64,
    pub per_image: Vec<ImageMetrics>,
}

struct PairPartial {
    date: NaiveDate,
    n: usize,
    abs_sum: f64,
    sq_sum: f64,
    confusion: Confusion,
    r2: f64,
    ssim_sum: f64,
}

fn pair_partial(
    date: NaiveDate,
    t: &Raster,
    p: &Raster,
    cfg: &ReportConfig,
) -> Result<PairPartial> {
    let mut abs_sum = 0.0f64;
    let mut sq_sum = 0.0f64;
    for (&tv, &pv) in t.values().iter().zip(p.values()) {
        if tv.is_nan() || pv.is_nan() {
            continue;
        }
        let d = (tv as f64 - pv as f64).abs();
        abs_sum += d;
        sq_sum += d * d;
    }
    let confusion = Confusion::of_pair(t, p, cfg.melt_threshold);
    let (r2, _) = r2_of_pair(t, p);
    let (ssim_sum, _) = ssim::ssim_pair_sum(t, p, &cfg.ssim)?;
    Ok(PairPartial {
        date,
        n: confusion.n,
        abs_sum,
        sq_sum,
        confusion,
        r2,
        ssim_sum,
    })
}

/// Computes the full set of scores for one target/prediction series pair.
pub fn metric_report(
    targets: &[DatedRaster],
    preds: &[DatedRaster],
    cfg: &ReportConfig,
) -> Result<MetricReport> {
    let pairs = align(targets, preds)?;
    let partials: Vec<PairPartial> = pairs
        .par_iter()
        .map(|(d, t, p)| pair_partial(*d, t, p, cfg))
        .collect::<Result<Vec<_>>>()?;

    let total: usize = partials.iter().map(|p| p.n).sum();
    if total == 0 {
        return Err(Error::NoValidPixels);
    }
    let nf = total as f64;

    let mae = partials.iter().map(|p| p.abs_sum).sum::<f64>() / nf;
    let mse = partials.iter().map(|p| p.sq_sum).sum::<f64>() / nf;
    let (rmse, psnr_db) = rmse_psnr(mse);
    let ssim = partials.iter().map(|p| p.ssim_sum).sum::<f64>() / nf;
    let r2 = partials.iter().map(|p| p.n as f64 * p.r2).sum::<f64>() / nf;
    let confusions: Vec<Confusion> = partials.iter().map(|p| p.confusion).collect();
    let cls = combine_classification(&confusions)?;

    let covered: Vec<&PairPartial> = partials.iter().filter(|p| p.n > 0).collect();
    let mae_means: Vec<(f64, usize)> = covered
        .iter()
        .map(|p| (p.abs_sum / p.n as f64, p.n))
        .collect();
    let mse_means: Vec<(f64, usize)> = covered
        .iter()
        .map(|p| (p.sq_sum / p.n as f64, p.n))
        .collect();
    let ssim_means: Vec<(f64, usize)> = covered
        .iter()
        .map(|p| (p.ssim_sum / p.n as f64, p.n))
        .collect();

    let per_image = partials
        .iter()
        .map(|p| ImageMetrics {
            date: p.date,
            n_valid: p.n,
            mae: if p.n > 0 { p.abs_sum / p.n as f64 } else { 0.0 },
            mse: if p.n > 0 { p.sq_sum / p.n as f64 } else { 0.0 },
            accuracy: if p.n > 0 {
                p.confusion.correct() as f64 / p.n as f64
            } else {
                0.0
            },
            ssim: if p.n > 0 {
                p.ssim_sum / p.n as f64
            } else {
                0.0
            },
        })
        .collect();

    Ok(MetricReport {
        n_images: partials.len(),
        n_valid_total: total,
        mae,
        mse,
        rmse,
        psnr_db,
        ssim,
        accuracy: cls.accuracy,
        precision: cls.precision,
        recall: cls.recall,
        f1: cls.f1,
        r2,
        sigma_mae: weighted_sigma(&mae_means, mae),
        sigma_mse: weighted_sigma(&mse_means, mse),
        sigma_acc: cls.sigma_acc,
        sigma_ssim: weighted_sigma(&ssim_means, ssim),
        pooled_precision: cls.pooled_precision,
        pooled_recall: cls.pooled_recall,
        per_image,
    })
}

/// Serializes a PSNR as a number, or as the string `"inf"` for a perfect
/// prediction.
mod psnr_serde {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str("inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = f64;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                if v == "inf" {
                    Ok(f64::INFINITY)
                } else {
                    Err(E::custom(format!("unexpected PSNR string {v:?}")))
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Grid;

    fn date(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn series(values: Vec<(&str, Vec<f32>)>, width: u32) -> Vec<DatedRaster> {
        values
            .into_iter()
            .map(|(d, v)| {
                let h = v.len() as u32 / width;
                DatedRaster::new(date(d), Raster::from_dims(width, h, 100.0, v).unwrap())
            })
            .collect()
    }

    #[test]
    fn mae_and_mse_hand_examples() {
        let t = series(vec![("2019-06-12", vec![0.0, 1.0, f32::NAN, 0.5])], 4);
        let p = series(vec![("2019-06-12", vec![0.25, 0.75, 0.9, 0.5])], 4);
        let (mae, _) = spatial_error(&t, &p, 1).unwrap();
        assert!((mae - 0.5 / 3.0).abs() < 1e-12);
        let (mse, _) = spatial_error(&t, &p, 2).unwrap();
        assert!((mse - 0.125 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn identical_series_have_zero_error() {
        let t = series(vec![("2019-06-12", vec![0.1, 0.2, 0.3, 0.4])], 2);
        let (err, sigma) = spatial_error(&t, &t, 2).unwrap();
        assert_eq!(err, 0.0);
        assert_eq!(sigma, 0.0);
    }

    #[test]
    fn spatial_error_rejects_date_mismatch() {
        let t = series(vec![("2019-06-12", vec![0.1])], 1);
        let p = series(vec![("2019-06-13", vec![0.1])], 1);
        assert!(matches!(
            spatial_error(&t, &p, 1),
            Err(Error::DateMismatch { .. })
        ));
    }

    #[test]
    fn spatial_error_rejects_all_invalid() {
        let t = series(vec![("2019-06-12", vec![f32::NAN, f32::NAN])], 2);
        let p = series(vec![("2019-06-12", vec![0.1, 0.2])], 2);
        assert!(matches!(
            spatial_error(&t, &p, 1),
            Err(Error::NoValidPixels)
        ));
    }

    #[test]
    fn rmse_psnr_values() {
        let (rmse, psnr) = rmse_psnr(0.01);
        assert!((rmse - 0.1).abs() < 1e-12);
        assert!((psnr - 20.0).abs() < 1e-9);
        // Consistent with an MSE of 0.0250 mapping to roughly 16.0 dB.
        let (_, psnr) = rmse_psnr(0.0250);
        assert!((psnr - 16.0206).abs() < 1e-3);
        let (rmse, psnr) = rmse_psnr(0.0);
        assert_eq!(rmse, 0.0);
        assert!(psnr.is_infinite());
    }

    #[test]
    fn classification_single_image_counts() {
        // tp=2 fp=1 fn=1 tn=6 over ten pixels.
        let t = series(
            vec![(
                "2019-06-12",
                vec![0.9, 0.8, 0.05, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            )],
            10,
        );
        let p = series(
            vec![(
                "2019-06-12",
                vec![0.9, 0.8, 0.9, 0.05, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            )],
            10,
        );
        let s = classification_metrics(&t, &p, MELT_THRESHOLD).unwrap();
        assert!((s.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.accuracy - 0.8).abs() < 1e-12);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.pooled_precision, s.precision);
    }

    #[test]
    fn classification_strict_threshold_boundary() {
        // Target exactly at the threshold is no-melt under strict inequality,
        // so a melt prediction is an error; both below is correct.
        let t = series(vec![("2019-06-12", vec![0.10, 0.05])], 2);
        let p = series(vec![("2019-06-12", vec![0.20, 0.09])], 2);
        let s = classification_metrics(&t, &p, MELT_THRESHOLD).unwrap();
        assert!((s.accuracy - 0.5).abs() < 1e-12);
    }

    #[test]
    fn r2_identity_and_mean_predictor() {
        let t = series(vec![("2019-06-12", vec![0.0, 0.25, 0.5, 1.0])], 4);
        assert!((r_squared(&t, &t).unwrap() - 1.0).abs() < 1e-12);
        let mean = (0.0 + 0.25 + 0.5 + 1.0) / 4.0;
        let p = series(vec![("2019-06-12", vec![mean as f32; 4])], 4);
        assert!(r_squared(&t, &p).unwrap().abs() < 1e-7);
    }

    #[test]
    fn r2_clips_large_negative_values() {
        // Reflecting {0, 1} about their mean gives SSres = 4 * SStot, a raw
        // R^2 of -3, which clips to -1. The literal negation gives -7 raw and
        // clips the same way.
        let t = series(vec![("2019-06-12", vec![0.0, 1.0])], 2);
        let reflected = series(vec![("2019-06-12", vec![1.0, 0.0])], 2);
        assert_eq!(r_squared(&t, &reflected).unwrap(), -1.0);
        let negated = series(vec![("2019-06-12", vec![0.0, -1.0])], 2);
        assert_eq!(r_squared(&t, &negated).unwrap(), -1.0);
    }

    #[test]
    fn monthly_means_weight_images_equally() {
        let preds = series(
            vec![
                ("2019-06-02", vec![0.2, 0.2, 0.2, f32::NAN]),
                ("2020-06-20", vec![0.6, f32::NAN, f32::NAN, f32::NAN]),
            ],
            4,
        );
        let by_month = monthly_mean_fraction(&preds);
        assert!((by_month[&6] - 0.4).abs() < 1e-7);
        assert!(!by_month.contains_key(&4));
    }

    #[test]
    fn monthly_means_single_image() {
        let preds = series(vec![("2019-06-02", vec![0.3, 0.3])], 2);
        let by_month = monthly_mean_fraction(&preds);
        assert!((by_month[&6] - 0.3).abs() < 1e-7);
    }

    #[test]
    fn extent_unit_conversion() {
        // 1000 cells of fraction 1.0 on a 100 m grid cover 10 km^2.
        let grid = Grid::new(50, 20, 100.0).unwrap();
        let preds = vec![DatedRaster::new(
            date("2019-06-12"),
            Raster::filled(grid, 1.0),
        )];
        let extent = melt_extent_timeseries(&preds);
        assert!((extent[0].1 - 10.0).abs() < 1e-9);

        let zero = vec![DatedRaster::new(
            date("2019-06-13"),
            Raster::filled(grid, 0.0),
        )];
        assert_eq!(melt_extent_timeseries(&zero)[0].1, 0.0);
    }

    #[test]
    fn psnr_marker_round_trips_through_json() {
        let t = series(vec![("2019-06-12", vec![0.1, 0.6, 0.2, 0.9])], 2);
        let report = metric_report(&t, &t, &ReportConfig::default()).unwrap();
        assert!(report.psnr_db.is_infinite());
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"inf\""));
        let back: MetricReport = serde_json::from_str(&json).unwrap();
        assert!(back.psnr_db.is_infinite());
        assert_eq!(back.ssim, 1.0);
        assert_eq!(back.accuracy, 1.0);
    }
}
