//! Shared input builders for the benchmarks.

use meltkit_core::raster::{Grid, Raster};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random melt-fraction raster with a NaN swath gap.
pub fn masked_raster(seed: u64, width: u32, height: u32, nan_frac: f64) -> Raster {
    let grid = Grid::new(width, height, 100.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Raster::from_fn(grid, |_, _| {
        if rng.gen_bool(nan_frac) {
            f32::NAN
        } else {
            rng.gen_range(0.0..1.0)
        }
    })
}

/// Random binary melt raster on the fine grid.
pub fn binary_raster(seed: u64, width: u32, height: u32) -> Raster {
    let grid = Grid::new(width, height, 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Raster::from_fn(grid, |_, _| match rng.gen_range(0..10) {
        0 => f32::NAN,
        1..=4 => 1.0,
        _ => 0.0,
    })
}
