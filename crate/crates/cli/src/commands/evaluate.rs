use std::path::PathBuf;

use clap::Args;
use meltkit_core::metrics::{metric_report, ReportConfig};
use meltkit_core::raster::apply_landmask;
use meltkit_core::series::{DatedRaster, Manifest, Stream};
use meltkit_core::splits::SplitSet;

use crate::commands::predict::{build_predictor, ModelFlags};
use crate::commands::{load_manifest, load_split};
use crate::error::{config_err, data_err, CliResult};
use crate::report_file::{format_table, EvalReport};
use crate::util::{dataset_hash, require, write_json, ConfigFile};

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    root: Option<PathBuf>,

    #[arg(long)]
    split: Option<PathBuf>,

    /// Split set to evaluate on.
    #[arg(long, default_value = "test")]
    set: String,

    /// Reference stream to score against: sar_target, or truth on
    /// synthetic datasets.
    #[arg(long, default_value = "sar_target")]
    reference: String,

    /// Directory of precomputed predictions (from `predict`); otherwise the
    /// model flags below run the model inline.
    #[arg(long)]
    pred_dir: Option<PathBuf>,

    /// Label for the evaluated model when using --pred-dir.
    #[arg(long)]
    model_name: Option<String>,

    #[command(flatten)]
    model: ModelFlags,

    /// Directory receiving report.json and report.txt.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

pub fn run(args: EvaluateArgs, cfg: &ConfigFile) -> CliResult<()> {
    let root = require(args.root, cfg.root.clone(), "--root")?;
    let split_path = require(args.split, cfg.split.clone(), "--split")?;
    let out_dir = require(args.out_dir, cfg.out.clone(), "--out-dir")?;
    let manifest = load_manifest(&root)?;
    let split = load_split(&split_path)?;
    let set: SplitSet = args.set.parse()?;
    let dates = split.dates_in(set);
    if dates.is_empty() {
        return Err(data_err(format!("split set {set} is empty")));
    }

    let reference_stream = match args.reference.as_str() {
        "sar_target" => Stream::SarTarget,
        "truth" => Stream::Truth,
        other => return Err(config_err(format!("unknown reference {other:?}"))),
    };
    let landmask = manifest.series(&root, Stream::Landmask)?.load_static()?;
    let reference = manifest.series(&root, reference_stream)?;
    let targets: Vec<DatedRaster> = reference
        .load_dates(&dates)?
        .into_iter()
        .map(|dr| {
            Ok(DatedRaster::new(
                dr.date,
                apply_landmask(&dr.raster, &landmask)?,
            ))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let (model_label, param_count, provenance, preds) = match &args.pred_dir {
        Some(dir) => {
            let pred_manifest = Manifest::load(dir)?;
            let series = pred_manifest.series(dir, Stream::Prediction)?;
            let preds: Vec<DatedRaster> = series
                .load_dates(&dates)?
                .into_iter()
                .map(|dr| {
                    Ok(DatedRaster::new(
                        dr.date,
                        apply_landmask(&dr.raster, &landmask)?,
                    ))
                })
                .collect::<CliResult<Vec<_>>>()?;
            let label = args.model_name.clone().unwrap_or_else(|| "external".into());
            (label, None, None, preds)
        }
        None => {
            let (predictor, params_file) = build_predictor(
                &root,
                &manifest,
                &args.model,
                cfg,
                Some(&split),
                out_dir.clone(),
            )?;
            let preds: Vec<DatedRaster> = dates
                .iter()
                .map(|&d| Ok(DatedRaster::new(d, predictor.predict(d)?)))
                .collect::<CliResult<Vec<_>>>()?;
            let (count, provenance) = match params_file {
                Some(f) => (Some(f.params.free_param_count()), Some(f.provenance)),
                None => (None, None),
            };
            (predictor.model_name().to_string(), count, provenance, preds)
        }
    };

    let metrics = metric_report(&targets, &preds, &ReportConfig::default())?;
    let report = EvalReport {
        model: model_label,
        param_count,
        reference: args.reference.clone(),
        split_set: set.to_string(),
        split_seed: split.seed,
        dataset_hash: dataset_hash(&root)?,
        params_provenance: provenance,
        metrics,
    };

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| data_err(format!("creating {}: {e}", out_dir.display())))?;
    write_json(&out_dir.join("report.json"), &report)?;
    let table = format_table(std::slice::from_ref(&report));
    std::fs::write(out_dir.join("report.txt"), &table)
        .map_err(|e| data_err(format!("writing report.txt: {e}")))?;
    print!("{table}");
    Ok(())
}
