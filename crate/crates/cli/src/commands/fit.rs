use std::path::PathBuf;

use clap::Args;
use meltkit_core::baselines::{
    fit_interpolate_mar, fit_threshold_dem, DemFitHyper, FitProvenance, MarSweep, ModelParams,
    PmwThresholdParams, RunningMeanParams, SelectionMetric,
};
use meltkit_core::series::Stream;
use meltkit_core::splits::SplitSet;

use crate::commands::{load_manifest, load_split};
use crate::error::{config_err, CliResult};
use crate::util::{dataset_hash, require, ConfigFile};

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long)]
    root: Option<PathBuf>,

    #[arg(long)]
    split: Option<PathBuf>,

    /// One of: running_mean_sar, interpolate_mar, threshold_pmw, threshold_dem.
    #[arg(long)]
    model: Option<String>,

    /// Output params JSON.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    /// Interpolation horizon of the running-mean model.
    #[arg(long, default_value_t = 3)]
    kh: usize,

    /// Sweep points for the MAR calibration; defaults span the standard
    /// calibration ranges.
    #[arg(long, value_delimiter = ',')]
    mar_kernels: Option<Vec<usize>>,

    #[arg(long, value_delimiter = ',')]
    mar_sigmas: Option<Vec<f64>>,

    #[arg(long, value_delimiter = ',')]
    mar_gammas: Option<Vec<f64>>,

    #[arg(long, value_delimiter = ',')]
    mar_brightness: Option<Vec<f64>>,

    /// Training days used to score sweep candidates (0 = all).
    #[arg(long, default_value_t = 16)]
    fit_sample: usize,

    /// Metric that picks the winning sweep point.
    #[arg(long, default_value = "ssim")]
    select_metric: String,

    /// Square tile edge for the DEM fit batches.
    #[arg(long, default_value_t = 64)]
    dem_tile: u32,

    #[arg(long, default_value_t = 0.48)]
    pmw_gamma: f64,

    #[arg(long, default_value_t = 128.0)]
    pmw_omega: f64,
}

fn parse_metric(s: &str) -> CliResult<SelectionMetric> {
    Ok(match s {
        "ssim" => SelectionMetric::Ssim,
        "mae" => SelectionMetric::Mae,
        "accuracy" => SelectionMetric::Accuracy,
        other => return Err(config_err(format!("unknown selection metric {other:?}"))),
    })
}

pub fn run(args: FitArgs, cfg: &ConfigFile) -> CliResult<()> {
    let root = require(args.root, cfg.root.clone(), "--root")?;
    let split_path = require(args.split, cfg.split.clone(), "--split")?;
    let model = require(args.model, cfg.model.clone(), "--model")?;
    let out = require(args.out, cfg.out.clone(), "--out")?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);

    let manifest = load_manifest(&root)?;
    let split = load_split(&split_path)?;
    let hash = dataset_hash(&root)?;
    let targets_series = manifest.series(&root, Stream::SarTarget)?;
    let train_dates: Vec<chrono::NaiveDate> = split
        .dates_in(SplitSet::Train)
        .into_iter()
        .filter(|&d| targets_series.contains(d))
        .collect();

    let (params, hyper): (ModelParams, serde_json::Value) = match model.as_str() {
        "running_mean_sar" => {
            let p = RunningMeanParams { horizon: args.kh };
            (
                ModelParams::RunningMeanSar(p),
                serde_json::json!({ "horizon": args.kh }),
            )
        }
        "threshold_pmw" => {
            // Deliberately not tuned; the constants come from the
            // operational product.
            let p = PmwThresholdParams {
                gamma: args.pmw_gamma,
                omega_kelvin: args.pmw_omega,
            };
            (
                ModelParams::ThresholdPmw(p),
                serde_json::json!({ "fitted": false }),
            )
        }
        "interpolate_mar" => {
            let metric = parse_metric(&args.select_metric)?;
            let mut sweep = MarSweep::default();
            if let Some(v) = args.mar_kernels {
                sweep.blur_kernels = v;
            }
            if let Some(v) = args.mar_sigmas {
                sweep.blur_sigmas = v;
            }
            if let Some(v) = args.mar_gammas {
                sweep.gammas = v;
            }
            if let Some(v) = args.mar_brightness {
                sweep.brightnesses = v;
            }
            let mar_series = manifest.series(&root, Stream::MarWa1)?;
            let landmask = manifest.series(&root, Stream::Landmask)?.load_static()?;
            let mut fit_dates: Vec<chrono::NaiveDate> = train_dates
                .iter()
                .copied()
                .filter(|&d| mar_series.contains(d))
                .collect();
            if args.fit_sample > 0 && args.fit_sample < fit_dates.len() {
                // Deterministic thinning: evenly strided sample of the
                // training days.
                let step = fit_dates.len() as f64 / args.fit_sample as f64;
                fit_dates = (0..args.fit_sample)
                    .map(|i| fit_dates[(i as f64 * step) as usize])
                    .collect();
            }
            let inputs = mar_series.load_dates(&fit_dates)?;
            let targets = targets_series.load_dates(&fit_dates)?;
            let (p, score) = fit_interpolate_mar(&inputs, &targets, &landmask, &sweep, metric)?;
            println!(
                "swept {} candidates over {} training days; best {} score {score:.4}",
                sweep.points().len(),
                fit_dates.len(),
                args.select_metric
            );
            let hyper = serde_json::json!({
                "sweep": sweep,
                "metric": args.select_metric,
                "fit_dates": fit_dates,
            });
            (ModelParams::InterpolateMar(p), hyper)
        }
        "threshold_dem" => {
            let dem = manifest.series(&root, Stream::Dem)?.load_static()?;
            let targets = targets_series.load_dates(&train_dates)?;
            let hyper = DemFitHyper {
                seed,
                tile: args.dem_tile,
                ..DemFitHyper::default()
            };
            let fit = fit_threshold_dem(&dem, &targets, &hyper)?;
            println!(
                "DEM fit: loss {:.6} -> {:.6} over {} epochs ({} learning-rate reductions)",
                fit.initial_loss,
                fit.final_loss,
                fit.epoch_losses.len() - 1,
                fit.lr_reductions.len()
            );
            if !fit.unfitted_months.is_empty() {
                eprintln!(
                    "months without training data kept initialization: {:?}",
                    fit.unfitted_months
                );
            }
            let hyper_json = serde_json::to_value(&hyper)
                .map_err(|e| crate::error::data_err(format!("serializing hyper: {e}")))?;
            (ModelParams::ThresholdDem(fit.params), hyper_json)
        }
        other => {
            return Err(config_err(format!(
                "unknown model {other:?}; expected one of {}",
                crate::model::MODEL_NAMES
            )))
        }
    };

    let file = meltkit_core::baselines::ParamsFile {
        params,
        provenance: FitProvenance {
            seed,
            dataset_hash: hash,
            hyper: Some(hyper),
        },
    };
    file.save(&out)?;
    println!("wrote {} parameters -> {}", model, out.display());
    Ok(())
}
