use std::path::PathBuf;

use clap::Args;
use meltkit_core::mwbr::save_raster;
use meltkit_core::sar::{derive_daily_fractions, SarScene};
use meltkit_core::series::{ManifestEntry, Stream};

use crate::commands::load_manifest;
use crate::error::{data_err, CliResult};
use crate::util::{require, ConfigFile};

#[derive(Args, Debug)]
pub struct DeriveSarArgs {
    /// Dataset root with a backscatter stream in its manifest.
    #[arg(long)]
    root: Option<PathBuf>,

    /// Fine-to-coarse aggregation factor.
    #[arg(long, default_value_t = 10)]
    factor: u32,
}

pub fn run(args: DeriveSarArgs, cfg: &ConfigFile) -> CliResult<()> {
    let root = require(args.root, cfg.root.clone(), "--root")?;
    let mut manifest = load_manifest(&root)?;
    let series = manifest.series(&root, Stream::Backscatter)?;

    let mut scenes = Vec::with_capacity(series.len());
    for entry in series.entries() {
        let acquired = entry.acquired_at.ok_or_else(|| {
            data_err(format!(
                "backscatter entry for {} has no acquisition timestamp",
                entry.date
            ))
        })?;
        scenes.push(SarScene {
            acquired,
            raster: meltkit_core::mwbr::load_raster(&entry.path)?,
        });
    }
    scenes.sort_by_key(|s| s.acquired);

    let outcome = derive_daily_fractions(&scenes, args.factor, 4..=9)?;
    for skip in &outcome.skipped {
        eprintln!("skipped scene at {}: {}", skip.acquired, skip.reason);
    }

    std::fs::create_dir_all(root.join("sar_target"))
        .map_err(|e| data_err(format!("creating sar_target dir: {e}")))?;
    manifest.drop_stream(Stream::SarTarget);
    let mut entries = manifest.entries.clone();
    let n_days = outcome.fractions.len();
    for dr in outcome.fractions {
        let path = format!("sar_target/{}.mwbr", dr.date);
        save_raster(&root.join(&path), &dr.raster)?;
        entries.push(ManifestEntry {
            stream: Stream::SarTarget,
            date: dr.date,
            path,
            grid: dr.raster.grid(),
            acquired_at: None,
        });
    }
    let manifest = meltkit_core::series::Manifest::new(entries);
    manifest.save(&root)?;
    println!(
        "derived {n_days} daily melt-fraction rasters from {} scenes ({} skipped)",
        scenes.len(),
        outcome.skipped.len()
    );
    Ok(())
}
