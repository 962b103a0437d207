use chrono::NaiveDate;
use thiserror::Error;

use crate::raster::Grid;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. Variants map one-to-one onto the defined failure
/// modes of the public operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("bad magic {found:?}: not an MWBR file")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported MWBR version {0}")]
    UnsupportedVersion(u16),

    #[error("payload size mismatch: expected {expected} bytes, found {found}")]
    PayloadSize { expected: u64, found: u64 },

    #[error("raster dimensions {width}x{height} overflow the addressable size")]
    DimensionOverflow { width: u32, height: u32 },

    #[error("degenerate grid: width/height must be >= 1 and cell size positive")]
    DegenerateGrid,

    #[error("value buffer length {len} does not match grid {grid}")]
    ValueLength { len: usize, grid: Grid },

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: Grid, right: Grid },

    #[error("series date mismatch at {date}: present on one side only")]
    DateMismatch { date: NaiveDate },

    #[error("duplicate date {date} in series")]
    DuplicateDate { date: NaiveDate },

    #[error("series has no entry for {date}")]
    MissingDate { date: NaiveDate },

    #[error("no valid pixels")]
    NoValidPixels,

    #[error("raster {width}x{height} too small for windowed statistics")]
    RasterTooSmall { width: u32, height: u32 },

    #[error("missing winter baseline for year {year}")]
    MissingWinterBaseline { year: i32 },

    #[error("tile {tile_w}x{tile_h} does not fit grid {grid}")]
    TileTooLarge {
        tile_w: u32,
        tile_h: u32,
        grid: Grid,
    },

    #[error("tile function returned {found} values, expected {expected}")]
    TileShape { expected: usize, found: usize },

    #[error("mosaic coverage gap at pixel ({row}, {col})")]
    CoverageGap { row: u32, col: u32 },

    #[error("channel {channel} has zero variance")]
    ZeroVariance { channel: usize },

    #[error("month {month} outside the fitted season (April-September)")]
    MonthOutOfSeason { month: u32 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("unsupported GeoTIFF: {0}")]
    UnsupportedGeoTiff(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("TIFF decode: {0}")]
    Tiff(#[from] tiff::TiffError),
}
