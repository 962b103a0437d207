use std::path::PathBuf;

use clap::Args;

use crate::error::{config_err, data_err, CliResult};
use crate::report_file::{format_table, EvalReport};
use crate::util::ConfigFile;

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Evaluation report JSONs to merge into one table, in row order.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,

    /// Write the merged table here as well as printing it.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: ReportArgs, _cfg: &ConfigFile) -> CliResult<()> {
    let mut rows = Vec::new();
    for path in &args.inputs {
        let bytes = std::fs::read(path)
            .map_err(|e| config_err(format!("reading {}: {e}", path.display())))?;
        let report: EvalReport = serde_json::from_slice(&bytes)
            .map_err(|e| data_err(format!("parsing {}: {e}", path.display())))?;
        rows.push(report);
    }
    let table = format_table(&rows);
    if let Some(out) = &args.out {
        std::fs::write(out, &table)
            .map_err(|e| data_err(format!("writing {}: {e}", out.display())))?;
    }
    print!("{table}");
    Ok(())
}
