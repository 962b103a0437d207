use std::path::PathBuf;

use clap::Args;
use meltkit_core::geotiff::import_geotiff;
use meltkit_core::mwbr::save_raster;

use crate::error::{config_err, CliResult};
use crate::util::{require, require_file, ConfigFile};

#[derive(Args, Debug)]
pub struct ImportGeotiffArgs {
    /// Single-band float GeoTIFF to convert.
    #[arg(long)]
    input: Option<PathBuf>,

    /// Output MWBR path.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Pixel value to map to NaN.
    #[arg(long)]
    nodata: Option<f32>,

    /// Cell size of the imported grid in meters.
    #[arg(long, default_value_t = 100.0)]
    cell_size: f32,
}

pub fn run(args: ImportGeotiffArgs, _cfg: &ConfigFile) -> CliResult<()> {
    let input = require(args.input, None, "--input")?;
    let output = require(args.output, None, "--output")?;
    require_file(&input, "input GeoTIFF")?;
    if args.cell_size <= 0.0 {
        return Err(config_err("--cell-size must be positive"));
    }
    let raster = import_geotiff(&input, args.nodata, args.cell_size)?;
    save_raster(&output, &raster)?;
    let (n_valid, frac) = raster.valid_stats();
    println!(
        "imported {} -> {} ({}x{}, {n_valid} valid pixels, {:.1}%)",
        input.display(),
        output.display(),
        raster.width(),
        raster.height(),
        frac * 100.0
    );
    Ok(())
}
