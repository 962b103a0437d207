use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::Args;
use meltkit_core::baselines::{ParamsFile, RunningMeanParams};
use meltkit_core::mwbr::save_raster;
use meltkit_core::series::{Manifest, ManifestEntry, Stream};
use meltkit_core::splits::{SplitAssignment, SplitSet};
use meltkit_core::tiling::TileSpec;

use crate::commands::{load_manifest, load_params, load_split};
use crate::error::{config_err, data_err, CliResult};
use crate::model::{ExternalSpec, Predictor};
use crate::util::{parse_date, require, ConfigFile};

/// Flags shared by every command that runs a model.
#[derive(Args, Debug, Clone)]
pub struct ModelFlags {
    /// Model to run: one of running_mean_sar, interpolate_mar,
    /// threshold_pmw, threshold_dem, external.
    #[arg(long)]
    pub model: Option<String>,

    /// Fitted parameters JSON; required for the four baselines.
    #[arg(long)]
    pub params: Option<PathBuf>,

    /// External command invoked once per tile with the tile directory as its
    /// final argument; it reads in_XX.mwbr and writes out.mwbr there.
    #[arg(long)]
    pub exec: Option<String>,

    /// Invoke the external command one tile at a time.
    #[arg(long)]
    pub serial_exec: bool,

    /// Feed the external command raw channels without blur/standardization.
    #[arg(long)]
    pub no_preprocess: bool,

    /// Tile edge for external-model inference.
    #[arg(long, default_value_t = 512)]
    pub tile: u32,

    /// Stride between tiles for external-model inference.
    #[arg(long, default_value_t = 480)]
    pub stride: u32,

    /// Predicted-tile frame discarded before mosaicking.
    #[arg(long, default_value_t = 16)]
    pub erode: u32,

    /// Horizon of the running-mean input channel of the external model.
    #[arg(long, default_value_t = 3)]
    pub rm_horizon: usize,
}

/// Resolves the model flags into a ready predictor plus the params file it
/// came from (None for external models).
pub fn build_predictor(
    root: &Path,
    manifest: &Manifest,
    flags: &ModelFlags,
    cfg: &ConfigFile,
    split: Option<&SplitAssignment>,
    workdir: PathBuf,
) -> CliResult<(Predictor, Option<ParamsFile>)> {
    let model = flags.model.clone().or(cfg.model.clone());
    if model.as_deref() == Some("external") {
        let exec = flags
            .exec
            .as_deref()
            .ok_or_else(|| config_err("--model external needs --exec"))?;
        let exec: Vec<String> = exec.split_whitespace().map(str::to_owned).collect();
        if exec.is_empty() {
            return Err(config_err("--exec is empty"));
        }
        let spec = ExternalSpec {
            exec,
            tile_spec: TileSpec::new(flags.tile, flags.tile, flags.stride, flags.erode)?,
            serial: flags.serial_exec,
            no_preprocess: flags.no_preprocess,
            workdir,
        };
        let rm = RunningMeanParams {
            horizon: flags.rm_horizon,
        };
        let predictor = Predictor::build_external(root, manifest, split, rm, spec)?;
        return Ok((predictor, None));
    }

    let params_path = flags
        .params
        .clone()
        .or(cfg.params.clone())
        .ok_or_else(|| config_err("missing --params (or --model external with --exec)"))?;
    let file = load_params(&params_path)?;
    if let Some(name) = &model {
        if name != file.params.model_name() {
            return Err(config_err(format!(
                "--model {name} does not match params file model {}",
                file.params.model_name()
            )));
        }
    }
    let predictor = Predictor::build(root, manifest, &file.params, split)?;
    Ok((predictor, Some(file)))
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    root: Option<PathBuf>,

    #[arg(long)]
    split: Option<PathBuf>,

    /// Split set to predict: train, val, or test.
    #[arg(long)]
    set: Option<String>,

    /// Explicit dates to predict instead of a split set.
    #[arg(long, value_parser = parse_date, value_delimiter = ',')]
    dates: Option<Vec<NaiveDate>>,

    #[command(flatten)]
    model: ModelFlags,

    /// Directory receiving prediction/DATE.mwbr plus a manifest.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

pub fn run(args: PredictArgs, cfg: &ConfigFile) -> CliResult<()> {
    let root = require(args.root, cfg.root.clone(), "--root")?;
    let out_dir = require(args.out_dir, cfg.out.clone(), "--out-dir")?;
    let manifest = load_manifest(&root)?;

    let split = match args.split.clone().or(cfg.split.clone()) {
        Some(p) => Some(load_split(&p)?),
        None => None,
    };
    let dates: Vec<NaiveDate> = match (&args.dates, &args.set) {
        (Some(d), _) => d.clone(),
        (None, Some(set)) => {
            let set: SplitSet = set.parse()?;
            split
                .as_ref()
                .ok_or_else(|| config_err("--set needs --split"))?
                .dates_in(set)
        }
        (None, None) => return Err(config_err("choose dates with --set or --dates")),
    };
    if dates.is_empty() {
        return Err(data_err("no dates selected"));
    }

    let (predictor, _) = build_predictor(
        &root,
        &manifest,
        &args.model,
        cfg,
        split.as_ref(),
        out_dir.clone(),
    )?;

    std::fs::create_dir_all(out_dir.join("prediction"))
        .map_err(|e| data_err(format!("creating {}: {e}", out_dir.display())))?;
    let mut entries = Vec::new();
    for &date in &dates {
        let raster = predictor.predict(date)?;
        let path = format!("prediction/{date}.mwbr");
        save_raster(&out_dir.join(&path), &raster)?;
        entries.push(ManifestEntry {
            stream: Stream::Prediction,
            date,
            path,
            grid: raster.grid(),
            acquired_at: None,
        });
    }
    Manifest::new(entries).save(&out_dir)?;
    println!(
        "wrote {} {} predictions -> {}",
        dates.len(),
        predictor.model_name(),
        out_dir.display()
    );
    Ok(())
}
