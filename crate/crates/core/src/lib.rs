//! Core library of the meltkit benchmark harness.
//!
//! Implements masked rasters with a binary on-disk format, the evaluation
//! metrics used for gap-filled surface-melt products, four traditional
//! baseline models, the SAR-to-melt derivation pipeline, stride/erode mosaic
//! inference, the stratified split protocol, and a deterministic synthetic
//! dataset generator for desk-scale verification.

pub mod baselines;
pub mod conv;
pub mod error;
pub mod geotiff;
pub mod metrics;
pub mod mwbr;
pub mod raster;
pub mod sar;
pub mod series;
pub mod splits;
pub mod synth;
pub mod tiling;

pub use error::{Error, Result};
pub use raster::{apply_landmask, Grid, Raster, ValidSet};
pub use series::{DatedRaster, Manifest, ManifestEntry, RasterSeries, Stream};
