//! Stratified train/val/test assignment.
//!
//! Validation and test days are drawn per (year, month) cell from 2018-2023
//! so evaluation weights every part of the season equally instead of
//! following sensing density. 2017 imagery covers only part of the study
//! area and always trains. Each cell with at least four observations gives
//! two days to val and two to test; cells with two or three give one each;
//! a lone observation trains. Val draws before test.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Years eligible for val/test sampling.
pub const STRATIFIED_YEARS: std::ops::RangeInclusive<i32> = 2018..=2023;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitSet {
    Train,
    Val,
    Test,
}

impl std::str::FromStr for SplitSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<SplitSet> {
        Ok(match s {
            "train" => SplitSet::Train,
            "val" => SplitSet::Val,
            "test" => SplitSet::Test,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown split set {other:?}"
                )))
            }
        })
    }
}

impl std::fmt::Display for SplitSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitSet::Train => "train",
            SplitSet::Val => "val",
            SplitSet::Test => "test",
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StratumReport {
    pub year: i32,
    pub month: u32,
    pub observed: usize,
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub seed: u64,
    pub assignments: BTreeMap<NaiveDate, SplitSet>,
    pub report: Vec<StratumReport>,
}

impl SplitAssignment {
    pub fn dates_in(&self, set: SplitSet) -> Vec<NaiveDate> {
        self.assignments
            .iter()
            .filter(|&(_, &s)| s == set)
            .map(|(&d, _)| d)
            .collect()
    }

    pub fn count(&self, set: SplitSet) -> usize {
        self.assignments.values().filter(|&&s| s == set).count()
    }

    pub fn load(path: &Path) -> Result<SplitAssignment> {
        let bytes = std::fs::read(path)?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        std::fs::write(path, bytes)?;
        Ok(())
    }
}

/// Deterministic stratified split of unique observation days.
pub fn stratified_split(dates: &[NaiveDate], seed: u64) -> Result<SplitAssignment> {
    if dates.is_empty() {
        return Err(Error::EmptyInput("observation dates"));
    }
    let mut cells: BTreeMap<(i32, u32), Vec<NaiveDate>> = BTreeMap::new();
    for &d in dates {
        cells.entry((d.year(), d.month())).or_default().push(d);
    }
    let total: usize = cells.values().map(|v| v.len()).sum();
    if total != dates.len() + (dates.len() - total) {
        // unreachable; duplicate detection happens below
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = BTreeMap::new();
    let mut report = Vec::new();
    for ((year, month), mut days) in cells {
        days.sort();
        for pair in days.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateDate { date: pair[0] });
            }
        }
        let n = days.len();
        let (n_val, n_test) = if STRATIFIED_YEARS.contains(&year) {
            match n {
                0..=1 => (0, 0),
                2..=3 => (1, 1),
                _ => (2, 2),
            }
        } else {
            (0, 0)
        };
        days.shuffle(&mut rng);
        for (i, d) in days.iter().enumerate() {
            let set = if i < n_val {
                SplitSet::Val
            } else if i < n_val + n_test {
                SplitSet::Test
            } else {
                SplitSet::Train
            };
            assignments.insert(*d, set);
        }
        report.push(StratumReport {
            year,
            month,
            observed: n,
            train: n - n_val - n_test,
            val: n_val,
            test: n_test,
        });
    }
    Ok(SplitAssignment {
        seed,
        assignments,
        report,
    })
}
