//! Metric implementations against naive oracles, plus the pooled-metric
//! invariants that do not fit a single module.

mod common;

use common::*;
use meltkit_core::metrics::{
    classification_metrics, masked_ssim, metric_report, monthly_mean_fraction, r_squared,
    spatial_error, ReportConfig, SsimConfig,
};
use meltkit_core::raster::Raster;
use meltkit_core::series::DatedRaster;

fn random_series(
    seed: u64,
    n_images: usize,
    w: u32,
    h: u32,
) -> (Vec<DatedRaster>, Vec<DatedRaster>) {
    let mut targets = Vec::new();
    let mut preds = Vec::new();
    for i in 0..n_images {
        let frac = 0.1 + 0.5 * (i as f64 / n_images.max(1) as f64);
        let (t, p) = random_masked_pair(seed * 1000 + i as u64, w, h, frac, 0.05);
        targets.push(DatedRaster::new(day_n(i as u64), t));
        preds.push(DatedRaster::new(day_n(i as u64), p));
    }
    (targets, preds)
}

#[test]
fn pooled_error_metrics_match_oracle() {
    let (targets, preds) = random_series(3, 8, 48, 40);
    let pairs = as_pairs(&targets, &preds);

    for p in [1u32, 2] {
        let (err, sigma) = spatial_error(&targets, &preds, p).unwrap();
        let (oerr, osigma) = oracle_spatial_error(&pairs, p);
        assert!((err - oerr).abs() < 1e-10);
        assert!((sigma - osigma).abs() < 1e-10);
    }

    let cls = classification_metrics(&targets, &preds, 0.1).unwrap();
    let ocls = oracle_classification(&pairs, 0.1);
    assert!((cls.accuracy - ocls.accuracy).abs() < 1e-10);
    assert!((cls.precision - ocls.precision).abs() < 1e-10);
    assert!((cls.recall - ocls.recall).abs() < 1e-10);
    assert!((cls.f1 - ocls.f1).abs() < 1e-10);

    assert!((r_squared(&targets, &preds).unwrap() - oracle_r2(&pairs)).abs() < 1e-10);
}

#[test]
fn separable_ssim_matches_dense_oracle() {
    let (targets, preds) = random_series(11, 2, 64, 64);
    let pairs = as_pairs(&targets, &preds);
    let cfg = SsimConfig::default();
    let (fast, _) = masked_ssim(&targets, &preds, &cfg).unwrap();
    let dense = oracle_masked_ssim(&pairs, &cfg);
    assert!(
        (fast - dense).abs() < 1e-6,
        "separable {fast} vs dense {dense}"
    );
}

#[test]
fn odd_window_ssim_matches_dense_oracle() {
    let (targets, preds) = random_series(12, 1, 40, 40);
    let pairs = as_pairs(&targets, &preds);
    let cfg = SsimConfig {
        window_size: 11,
        window_sigma: 1.5,
        ..SsimConfig::default()
    };
    let (fast, _) = masked_ssim(&targets, &preds, &cfg).unwrap();
    let dense = oracle_masked_ssim(&pairs, &cfg);
    assert!((fast - dense).abs() < 1e-6);
}

#[test]
fn image_order_permutation_changes_nothing() {
    let (targets, preds) = random_series(7, 6, 32, 32);
    let report = metric_report(&targets, &preds, &ReportConfig::default()).unwrap();

    let perm = [4usize, 0, 5, 2, 1, 3];
    let pt: Vec<DatedRaster> = perm.iter().map(|&i| targets[i].clone()).collect();
    let pp: Vec<DatedRaster> = perm.iter().map(|&i| preds[i].clone()).collect();
    let permuted = metric_report(&pt, &pp, &ReportConfig::default()).unwrap();

    for (a, b) in [
        (report.mae, permuted.mae),
        (report.mse, permuted.mse),
        (report.accuracy, permuted.accuracy),
        (report.precision, permuted.precision),
        (report.recall, permuted.recall),
        (report.f1, permuted.f1),
        (report.r2, permuted.r2),
        (report.ssim, permuted.ssim),
        (report.sigma_mae, permuted.sigma_mae),
        (report.sigma_acc, permuted.sigma_acc),
    ] {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn nan_payload_is_irrelevant() {
    let (targets, preds) = random_series(9, 3, 24, 24);
    let retagged: Vec<DatedRaster> = targets
        .iter()
        .map(|dr| {
            let raster = dr.raster.map(|v| {
                if v.is_nan() {
                    f32::from_bits(0x7fc0_dead)
                } else {
                    v
                }
            });
            DatedRaster::new(dr.date, raster)
        })
        .collect();
    let a = metric_report(&targets, &preds, &ReportConfig::default()).unwrap();
    let b = metric_report(&retagged, &preds, &ReportConfig::default()).unwrap();
    assert_eq!(a.mae, b.mae);
    assert_eq!(a.mse, b.mse);
    assert_eq!(a.accuracy, b.accuracy);
    assert_eq!(a.ssim, b.ssim);
    assert_eq!(a.r2, b.r2);
}

#[test]
fn report_respects_metric_ranges_and_f1_identity() {
    for seed in 0..5u64 {
        let (targets, preds) = random_series(seed + 40, 4, 28, 20);
        let r = metric_report(&targets, &preds, &ReportConfig::default()).unwrap();
        for v in [r.accuracy, r.precision, r.recall, r.f1, r.ssim] {
            assert!((0.0..=1.0).contains(&v), "metric {v} out of range");
        }
        assert!((-1.0..=1.0).contains(&r.r2));
        assert!((r.rmse - r.mse.sqrt()).abs() < 1e-15);
        if r.precision > 0.0 && r.recall > 0.0 {
            let harmonic = 2.0 / (1.0 / r.precision + 1.0 / r.recall);
            assert_eq!(r.f1, harmonic);
        }
    }
}

#[test]
fn monthly_means_ignore_prediction_mask_weights() {
    // Same valid values at the same dates but different NaN padding sizes
    // must give the same image-equal-weighted monthly means.
    let a = DatedRaster::new(
        date("2019-06-02"),
        Raster::from_dims(4, 1, 100.0, vec![0.2, 0.2, f32::NAN, f32::NAN]).unwrap(),
    );
    let b = DatedRaster::new(
        date("2019-06-20"),
        Raster::from_dims(4, 1, 100.0, vec![0.6, f32::NAN, f32::NAN, f32::NAN]).unwrap(),
    );
    let by_month = monthly_mean_fraction(&[a, b]);
    assert!((by_month[&6] - 0.4).abs() < 1e-7);
}
