//! Dataset manifests and date-indexed raster series.
//!
//! A dataset root holds one `manifest.json` listing every raster file with
//! its stream, calendar date, relative path, and grid. SAR backscatter
//! entries additionally carry an acquisition timestamp with seconds
//! precision.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mwbr;
use crate::raster::{Grid, Raster};

pub const MANIFEST_FILE: &str = "manifest.json";

/// The data streams a dataset can carry. `truth` only exists for synthetic
/// datasets, where the dense ground-truth melt field is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stream {
    SarTarget,
    MarWa1,
    PmwTb,
    Dem,
    Landmask,
    Prediction,
    Backscatter,
    Truth,
}

impl Stream {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stream::SarTarget => "sar_target",
            Stream::MarWa1 => "mar_wa1",
            Stream::PmwTb => "pmw_tb",
            Stream::Dem => "dem",
            Stream::Landmask => "landmask",
            Stream::Prediction => "prediction",
            Stream::Backscatter => "backscatter",
            Stream::Truth => "truth",
        }
    }
}

impl std::str::FromStr for Stream {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sar_target" => Stream::SarTarget,
            "mar_wa1" => Stream::MarWa1,
            "pmw_tb" => Stream::PmwTb,
            "dem" => Stream::Dem,
            "landmask" => Stream::Landmask,
            "prediction" => Stream::Prediction,
            "backscatter" => Stream::Backscatter,
            "truth" => Stream::Truth,
            other => return Err(Error::Manifest(format!("unknown stream {other:?}"))),
        })
    }
}

impl std::fmt::Display for Stream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub stream: Stream,
    pub date: NaiveDate,
    /// Path relative to the dataset root.
    pub path: String,
    pub grid: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acquired_at: Option<NaiveDateTime>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(mut entries: Vec<ManifestEntry>) -> Manifest {
        entries.sort_by(|a, b| {
            (a.stream, a.date, a.acquired_at).cmp(&(b.stream, b.date, b.acquired_at))
        });
        Manifest {
            version: 1,
            entries,
        }
    }

    pub fn load(root: &Path) -> Result<Manifest> {
        let path = root.join(MANIFEST_FILE);
        let bytes = fs::read(&path)
            .map_err(|e| Error::Manifest(format!("reading {}: {e}", path.display())))?;
        let manifest: Manifest = serde_json::from_slice(&bytes)?;
        Ok(manifest)
    }

    pub fn save(&self, root: &Path) -> Result<()> {
        let path = root.join(MANIFEST_FILE);
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        fs::write(path, bytes)?;
        Ok(())
    }

    pub fn streams(&self) -> BTreeSet<Stream> {
        self.entries.iter().map(|e| e.stream).collect()
    }

    /// Removes every entry of `stream`, e.g. before re-deriving it.
    pub fn drop_stream(&mut self, stream: Stream) {
        self.entries.retain(|e| e.stream != stream);
    }

    /// Date-ordered view of one stream, validated against the series
    /// invariants (strictly increasing dates, one shared grid).
    pub fn series(&self, root: &Path, stream: Stream) -> Result<RasterSeries> {
        let mut entries: Vec<&ManifestEntry> =
            self.entries.iter().filter(|e| e.stream == stream).collect();
        if entries.is_empty() {
            return Err(Error::Manifest(format!("no entries for stream {stream}")));
        }
        entries.sort_by_key(|e| e.date);
        let grid = entries[0].grid;
        let mut items = Vec::with_capacity(entries.len());
        let mut prev: Option<NaiveDate> = None;
        for e in entries {
            if e.grid != grid {
                return Err(Error::GridMismatch {
                    left: grid,
                    right: e.grid,
                });
            }
            if prev == Some(e.date) {
                return Err(Error::DuplicateDate { date: e.date });
            }
            prev = Some(e.date);
            items.push(SeriesEntry {
                date: e.date,
                path: root.join(&e.path),
                acquired_at: e.acquired_at,
            });
        }
        Ok(RasterSeries {
            stream,
            grid,
            entries: items,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SeriesEntry {
    pub date: NaiveDate,
    pub path: PathBuf,
    pub acquired_at: Option<NaiveDateTime>,
}

/// A date-indexed, disk-backed collection of rasters for one stream.
#[derive(Clone, Debug)]
pub struct RasterSeries {
    stream: Stream,
    grid: Grid,
    entries: Vec<SeriesEntry>,
}

impl RasterSeries {
    pub fn stream(&self) -> Stream {
        self.stream
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.entries.iter().map(|e| e.date).collect()
    }

    pub fn entries(&self) -> &[SeriesEntry] {
        &self.entries
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.entries.binary_search_by_key(&date, |e| e.date).is_ok()
    }

    pub fn load(&self, date: NaiveDate) -> Result<Raster> {
        let idx = self
            .entries
            .binary_search_by_key(&date, |e| e.date)
            .map_err(|_| Error::MissingDate { date })?;
        self.load_entry(&self.entries[idx])
    }

    fn load_entry(&self, entry: &SeriesEntry) -> Result<Raster> {
        let raster = mwbr::load_raster(&entry.path)?;
        if raster.grid() != self.grid {
            return Err(Error::GridMismatch {
                left: self.grid,
                right: raster.grid(),
            });
        }
        Ok(raster)
    }

    pub fn load_all(&self) -> Result<Vec<DatedRaster>> {
        self.entries
            .iter()
            .map(|e| {
                Ok(DatedRaster {
                    date: e.date,
                    raster: self.load_entry(e)?,
                })
            })
            .collect()
    }

    pub fn load_dates(&self, dates: &[NaiveDate]) -> Result<Vec<DatedRaster>> {
        dates
            .iter()
            .map(|&d| {
                Ok(DatedRaster {
                    date: d,
                    raster: self.load(d)?,
                })
            })
            .collect()
    }

    /// Loads the single raster of a static stream (DEM, landmask).
    pub fn load_static(&self) -> Result<Raster> {
        self.load_entry(&self.entries[0])
    }
}

/// An in-memory raster tagged with its calendar day. Metric and model
/// operations work on slices of these, ordered by date.
#[derive(Clone, Debug)]
pub struct DatedRaster {
    pub date: NaiveDate,
    pub raster: Raster,
}

impl DatedRaster {
    pub fn new(date: NaiveDate, raster: Raster) -> DatedRaster {
        DatedRaster { date, raster }
    }
}
