use std::path::PathBuf;

use clap::Args;
use meltkit_core::raster::Grid;
use meltkit_core::synth::{generate_synthetic, SynthConfig};

use crate::error::CliResult;
use crate::util::{parse_date, parse_years, require, ConfigFile};

#[derive(Args, Debug)]
pub struct GenSynthArgs {
    /// Output dataset root.
    #[arg(long)]
    root: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long, default_value_t = 512)]
    width: u32,

    #[arg(long, default_value_t = 384)]
    height: u32,

    #[arg(long, default_value_t = 100.0)]
    cell_size: f32,

    /// Years to generate, e.g. 2018:2019 or 2018,2021.
    #[arg(long, value_parser = parse_years)]
    years: Option<crate::util::Years>,

    /// Days between SAR observations.
    #[arg(long, default_value_t = 2)]
    revisit_days: u32,

    /// Fraction of the grid that is land.
    #[arg(long)]
    land_fraction: Option<f64>,

    /// Extreme-melt days to plant (default: June 12 of every year).
    #[arg(long, value_parser = parse_date, value_delimiter = ',')]
    event_dates: Option<Vec<chrono::NaiveDate>>,

    /// Generate at the full product-grid shape (2863x1633).
    #[arg(long)]
    full_scale: bool,
}

pub fn run(args: GenSynthArgs, cfg: &ConfigFile) -> CliResult<()> {
    let root = require(args.root, cfg.root.clone(), "--root")?;
    std::fs::create_dir_all(&root)
        .map_err(|e| crate::error::data_err(format!("creating {}: {e}", root.display())))?;

    let mut synth = SynthConfig {
        seed: args.seed.or(cfg.seed).unwrap_or(0),
        sar_revisit_days: args.revisit_days,
        ..SynthConfig::default()
    };
    let (width, height) = if args.full_scale {
        (2863, 1633)
    } else {
        (args.width, args.height)
    };
    synth.grid = Grid::new(width, height, args.cell_size)?;
    if let Some(years) = args.years {
        synth.years = years.0;
    }
    if let Some(frac) = args.land_fraction {
        synth.land_fraction = frac;
    }
    if args.event_dates.is_some() {
        synth.event_dates = args.event_dates;
    }

    let (_, summary) = generate_synthetic(&synth, &root)?;
    println!(
        "generated {} season days ({} SAR-observed), {} PMW and {} MAR images under {}",
        summary.season_days,
        summary.sar_days,
        summary.pmw_images,
        summary.mar_images,
        root.display()
    );
    Ok(())
}
