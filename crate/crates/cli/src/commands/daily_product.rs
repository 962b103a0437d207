use std::io::Write;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::Args;
use meltkit_core::mwbr::save_raster;
use meltkit_core::series::{Manifest, ManifestEntry, Stream};

use crate::commands::predict::{build_predictor, ModelFlags};
use crate::commands::{load_manifest, load_split};
use crate::error::{data_err, CliResult};
use crate::util::{parse_date, require, ConfigFile};

#[derive(Args, Debug)]
pub struct DailyProductArgs {
    #[arg(long)]
    root: Option<PathBuf>,

    /// Needed for models with a training-imagery input.
    #[arg(long)]
    split: Option<PathBuf>,

    #[command(flatten)]
    model: ModelFlags,

    #[arg(long, value_parser = parse_date)]
    from: Option<NaiveDate>,

    #[arg(long, value_parser = parse_date)]
    to: Option<NaiveDate>,

    /// Directory receiving one prediction per day plus extent.csv.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

pub fn run(args: DailyProductArgs, cfg: &ConfigFile) -> CliResult<()> {
    let root = require(args.root, cfg.root.clone(), "--root")?;
    let out_dir = require(args.out_dir, cfg.out.clone(), "--out-dir")?;
    let from = require(args.from, None, "--from")?;
    let to = require(args.to, None, "--to")?;
    if to < from {
        return Err(crate::error::config_err("--to precedes --from"));
    }
    let manifest = load_manifest(&root)?;
    let split = match args.split.clone().or(cfg.split.clone()) {
        Some(p) => Some(load_split(&p)?),
        None => None,
    };
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
    let mut extent_rows = String::from("date,area_km2\n");
    let mut date = from;
    let mut n_days = 0usize;
    while date <= to {
        let raster = predictor.predict(date)?;
        let cell_km = raster.cell_size_m() as f64 / 1000.0;
        let area: f64 = raster
            .values()
            .iter()
            .filter(|v| !v.is_nan())
            .map(|&v| v as f64)
            .sum::<f64>()
            * cell_km
            * cell_km;
        extent_rows.push_str(&format!("{date},{area:.6}\n"));
        let path = format!("prediction/{date}.mwbr");
        save_raster(&out_dir.join(&path), &raster)?;
        entries.push(ManifestEntry {
            stream: Stream::Prediction,
            date,
            path,
            grid: raster.grid(),
            acquired_at: None,
        });
        n_days += 1;
        date = date.succ_opt().unwrap();
    }

    Manifest::new(entries).save(&out_dir)?;
    let mut csv = std::fs::File::create(out_dir.join("extent.csv"))
        .map_err(|e| data_err(format!("creating extent.csv: {e}")))?;
    csv.write_all(extent_rows.as_bytes())
        .map_err(|e| data_err(format!("writing extent.csv: {e}")))?;
    println!(
        "wrote {n_days} daily {} rasters and extent.csv -> {}",
        predictor.model_name(),
        out_dir.display()
    );
    Ok(())
}
