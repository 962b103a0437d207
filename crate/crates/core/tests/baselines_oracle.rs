//! Baseline models against brute-force oracles.

mod common;

use chrono::NaiveDate;
use common::*;
use meltkit_core::baselines::{running_mean_sar, RunningMeanParams};
use meltkit_core::raster::Raster;
use meltkit_core::series::DatedRaster;

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

#[test]
fn running_mean_matches_neighborhood_oracle() {
    // Ten masked images; queries inside, between, and at the edges of the
    // series compare bit-for-bit against an explicit neighbor average.
    let mut train = Vec::new();
    for i in 0..10u64 {
        let (r, _) = random_masked_pair(500 + i, 24, 18, 0.3, 0.0);
        train.push(DatedRaster::new(date(2019, 6, 1 + 2 * i as u32), r));
    }
    let params = RunningMeanParams { horizon: 3 };

    for query in [
        date(2019, 6, 10), // between observations
        date(2019, 6, 9),  // exactly an observation: excluded from its own prediction
        date(2019, 5, 20), // before the series
        date(2019, 7, 4),  // after the series
    ] {
        let got = running_mean_sar(&train, query, &params).unwrap();

        // Independent neighbor selection: the last three observations
        // strictly before and the first three strictly after the query.
        let before: Vec<&Raster> = train
            .iter()
            .filter(|dr| dr.date < query)
            .map(|dr| &dr.raster)
            .collect();
        let after: Vec<&Raster> = train
            .iter()
            .filter(|dr| dr.date > query)
            .map(|dr| &dr.raster)
            .collect();
        let mut neighbors: Vec<&Raster> = before[before.len().saturating_sub(3)..].to_vec();
        neighbors.extend(after.iter().take(3));
        let expected = oracle_running_mean(&neighbors);

        assert!(got.bits_eq(&expected), "mismatch for query {query}");
    }
}

#[test]
fn running_mean_with_dense_neighbors_is_the_plain_mean() {
    let mut train = Vec::new();
    for i in 0..6u64 {
        let (r, _) = random_masked_pair(700 + i, 16, 12, 0.0, 0.0);
        train.push(DatedRaster::new(date(2019, 6, 1 + 2 * i as u32), r));
    }
    // Dates run 1, 3, 5, 7, 9, 11, so a query on the 6th sees all six
    // images as neighbors and the prediction is their plain mean.
    let query = date(2019, 6, 6);
    let got = running_mean_sar(&train, query, &RunningMeanParams { horizon: 3 }).unwrap();
    for row in 0..12 {
        for col in 0..16 {
            let mean_all: f64 = train
                .iter()
                .map(|dr| dr.raster.get(row, col) as f64)
                .sum::<f64>()
                / 6.0;
            assert!((got.get(row, col) as f64 - mean_all).abs() < 1e-6);
        }
    }
}
