//! The evaluation report written by `evaluate` and merged by `report`:
//! scores plus the provenance needed to reproduce them exactly.

use meltkit_core::baselines::FitProvenance;
use meltkit_core::metrics::MetricReport;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    /// Free parameters adjusted on this dataset; absent for external models.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param_count: Option<usize>,
    /// Stream the predictions were scored against.
    pub reference: String,
    pub split_set: String,
    pub split_seed: u64,
    pub dataset_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params_provenance: Option<FitProvenance>,
    pub metrics: MetricReport,
}

fn fmt(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.4}")
    }
}

fn param_cell(p: Option<usize>) -> String {
    p.map(|n| n.to_string()).unwrap_or_else(|| "n/a".into())
}

/// Aligned text table in the results-table column order, plus the extended
/// block of additional metrics.
pub fn format_table(rows: &[EvalReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<20} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
        "model", "#p", "MAE", "MSE", "Acc", "F1", "SSIM"
    ));
    out.push_str(&"-".repeat(72));
    out.push('\n');
    for r in rows {
        let m = &r.metrics;
        out.push_str(&format!(
            "{:<20} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
            r.model,
            param_cell(r.param_count),
            fmt(m.mae),
            fmt(m.mse),
            fmt(m.accuracy),
            fmt(m.f1),
            fmt(m.ssim),
        ));
    }
    out.push('\n');
    out.push_str(&format!(
        "{:<20} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
        "model", "PSNR", "RMSE", "R2", "Prec", "Rec", "sMAE", "sMSE", "sAcc", "sSSIM"
    ));
    out.push_str(&"-".repeat(102));
    out.push('\n');
    for r in rows {
        let m = &r.metrics;
        out.push_str(&format!(
            "{:<20} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
            r.model,
            fmt(m.psnr_db),
            fmt(m.rmse),
            fmt(m.r2),
            fmt(m.precision),
            fmt(m.recall),
            fmt(m.sigma_mae),
            fmt(m.sigma_mse),
            fmt(m.sigma_acc),
            fmt(m.sigma_ssim),
        ));
    }
    out
}
