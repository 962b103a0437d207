pub mod daily_product;
pub mod derive_sar;
pub mod evaluate;
pub mod fit;
pub mod gen_synth;
pub mod import_geotiff;
pub mod make_split;
pub mod predict;
pub mod report;

use std::path::Path;

use meltkit_core::baselines::ParamsFile;
use meltkit_core::series::Manifest;
use meltkit_core::splits::SplitAssignment;

use crate::error::{config_err, CliResult};
use crate::util::{require_dir, require_file};

pub fn load_manifest(root: &Path) -> CliResult<Manifest> {
    require_dir(root, "dataset root")?;
    Ok(Manifest::load(root)?)
}

pub fn load_split(path: &Path) -> CliResult<SplitAssignment> {
    require_file(path, "split file")?;
    Ok(SplitAssignment::load(path)?)
}

pub fn load_params(path: &Path) -> CliResult<ParamsFile> {
    require_file(path, "params file")?;
    ParamsFile::load(path).map_err(|e| config_err(format!("parsing {}: {e}", path.display())))
}
