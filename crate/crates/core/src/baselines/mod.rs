//! The four traditional downscaling models: a running mean over SAR
//! observations, a calibrated blur of the climate-model liquid-water field, a
//! brightness-temperature threshold on passive microwave, and a monthly
//! elevation band fitted to the DEM.

pub mod dem;
pub mod mar;
pub mod pmw;
pub mod running_mean;

use serde::{Deserialize, Serialize};

pub use dem::{
    fit_threshold_dem, tanh_hat, tanh_hat_deriv, threshold_dem_predict, DemBandParams, DemFitHyper,
    DemFitResult,
};
pub use mar::{fit_interpolate_mar, interpolate_mar, MarCalibParams, MarSweep, SelectionMetric};
pub use pmw::{pmw_winter_mean, threshold_pmw, PmwThresholdParams};
pub use running_mean::{running_mean_sar, RunningMeanParams};

/// Model-tagged parameter record, the payload of a fitted-parameters file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "model", content = "params", rename_all = "snake_case")]
pub enum ModelParams {
    RunningMeanSar(RunningMeanParams),
    InterpolateMar(MarCalibParams),
    ThresholdPmw(PmwThresholdParams),
    ThresholdDem(DemBandParams),
}

impl ModelParams {
    pub fn model_name(&self) -> &'static str {
        match self {
            ModelParams::RunningMeanSar(_) => "running_mean_sar",
            ModelParams::InterpolateMar(_) => "interpolate_mar",
            ModelParams::ThresholdPmw(_) => "threshold_pmw",
            ModelParams::ThresholdDem(_) => "threshold_dem",
        }
    }

    /// Count of free parameters adjusted on this dataset: the running-mean
    /// horizon, the four calibration knobs of the MAR blur, nothing for the
    /// untuned PMW threshold, and six monthly (a, b) pairs for the DEM band.
    pub fn free_param_count(&self) -> usize {
        match self {
            ModelParams::RunningMeanSar(_) => 1,
            ModelParams::InterpolateMar(_) => 4,
            ModelParams::ThresholdPmw(_) => 0,
            ModelParams::ThresholdDem(_) => 12,
        }
    }
}

/// Fit provenance embedded next to the parameters so any evaluation can be
/// reproduced exactly.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FitProvenance {
    pub seed: u64,
    pub dataset_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyper: Option<serde_json::Value>,
}

/// On-disk parameter file: parameters plus provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamsFile {
    #[serde(flatten)]
    pub params: ModelParams,
    pub provenance: FitProvenance,
}

impl ParamsFile {
    pub fn load(path: &std::path::Path) -> crate::error::Result<ParamsFile> {
        let bytes = std::fs::read(path)?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    pub fn save(&self, path: &std::path::Path) -> crate::error::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        std::fs::write(path, bytes)?;
        Ok(())
    }
}
