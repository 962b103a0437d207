use std::path::PathBuf;

use clap::Args;
use meltkit_core::series::Stream;
use meltkit_core::splits::{stratified_split, SplitSet};

use crate::commands::load_manifest;
use crate::error::CliResult;
use crate::util::{require, ConfigFile};

#[derive(Args, Debug)]
pub struct MakeSplitArgs {
    #[arg(long)]
    root: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    /// Output split JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: MakeSplitArgs, cfg: &ConfigFile) -> CliResult<()> {
    let root = require(args.root, cfg.root.clone(), "--root")?;
    let out = require(args.out, cfg.split.clone(), "--out")?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);

    let manifest = load_manifest(&root)?;
    let dates = manifest.series(&root, Stream::SarTarget)?.dates();
    let split = stratified_split(&dates, seed)?;
    split.save(&out)?;
    println!(
        "split {} observation days into {} train / {} val / {} test (seed {seed}) -> {}",
        dates.len(),
        split.count(SplitSet::Train),
        split.count(SplitSet::Val),
        split.count(SplitSet::Test),
        out.display()
    );
    Ok(())
}
