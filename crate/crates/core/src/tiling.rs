//! Tile sampling, stride/erode mosaic inference, input preprocessing, and the
//! receptive-field calculator.
//!
//! Mosaic inference runs an arbitrary tile function over a stride grid of
//! tiles, discards the outer `erode` frame of every predicted tile before
//! accumulation, and averages all remaining contributions per pixel. Tile
//! sides flush with the image border keep their frame, since no other tile
//! can supply those pixels; with that rule and `stride <= tile - 2 erode`,
//! every output pixel is covered.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conv::gaussian_blur_f32;
use crate::error::{Error, Result};
use crate::raster::{Grid, Raster};

/// Tile geometry for sampling and mosaicking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileSpec {
    pub tile_w: u32,
    pub tile_h: u32,
    pub stride: u32,
    pub erode: u32,
}

impl Default for TileSpec {
    fn default() -> Self {
        TileSpec {
            tile_w: 512,
            tile_h: 512,
            stride: 480,
            erode: 16,
        }
    }
}

impl TileSpec {
    pub fn new(tile_w: u32, tile_h: u32, stride: u32, erode: u32) -> Result<Self> {
        let spec = TileSpec {
            tile_w,
            tile_h,
            stride,
            erode,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let min_dim = self.tile_w.min(self.tile_h);
        if self.tile_w == 0 || self.tile_h == 0 {
            return Err(Error::InvalidParameter(
                "tile dimensions must be >= 1".into(),
            ));
        }
        if self.erode * 2 >= min_dim {
            return Err(Error::InvalidParameter(format!(
                "erode {} must be below half the tile dimension {}",
                self.erode, min_dim
            )));
        }
        if self.stride == 0 || self.stride > min_dim - 2 * self.erode {
            return Err(Error::InvalidParameter(format!(
                "stride {} must lie in 1..={} to guarantee coverage",
                self.stride,
                min_dim - 2 * self.erode
            )));
        }
        Ok(())
    }

    /// Shrinks the spec to fit a raster smaller than the tile, preserving the
    /// legality invariants.
    fn clamped_to(&self, width: u32, height: u32) -> TileSpec {
        let tile_w = self.tile_w.min(width);
        let tile_h = self.tile_h.min(height);
        let min_dim = tile_w.min(tile_h);
        let erode = self.erode.min((min_dim - 1) / 2);
        let stride = self.stride.clamp(1, min_dim - 2 * erode);
        TileSpec {
            tile_w,
            tile_h,
            stride,
            erode,
        }
    }
}

/// Uniformly random tile origins `(row, col)`, deterministic per seed.
/// Callers resample per epoch by varying the seed.
pub fn sample_tiles(grid: Grid, spec: &TileSpec, n: usize, seed: u64) -> Result<Vec<(u32, u32)>> {
    spec.validate()?;
    if spec.tile_w > grid.width || spec.tile_h > grid.height {
        return Err(Error::TileTooLarge {
            tile_w: spec.tile_w,
            tile_h: spec.tile_h,
            grid,
        });
    }
    let max_row = grid.height - spec.tile_h;
    let max_col = grid.width - spec.tile_w;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| (rng.gen_range(0..=max_row), rng.gen_range(0..=max_col)))
        .collect())
}

/// A stack of same-grid input channels.
#[derive(Clone, Debug)]
pub struct ChannelStack {
    grid: Grid,
    channels: Vec<Raster>,
}

impl ChannelStack {
    pub fn new(channels: Vec<Raster>) -> Result<ChannelStack> {
        let first = channels.first().ok_or(Error::EmptyInput("channel stack"))?;
        let grid = first.grid();
        for ch in &channels {
            if ch.grid() != grid {
                return Err(Error::GridMismatch {
                    left: grid,
                    right: ch.grid(),
                });
            }
        }
        Ok(ChannelStack { grid, channels })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn channels(&self) -> &[Raster] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }
}

/// One extracted multi-channel tile handed to the tile function.
#[derive(Clone, Debug)]
pub struct TileInput {
    pub origin: (u32, u32),
    pub width: u32,
    pub height: u32,
    pub cell_size_m: f32,
    channels: Vec<Vec<f32>>,
}

impl TileInput {
    pub fn channel(&self, i: usize) -> &[f32] {
        &self.channels[i]
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }
}

fn axis_origins(dim: u32, tile: u32, stride: u32) -> Vec<u32> {
    let last = dim - tile;
    let mut origins = Vec::new();
    let mut pos = 0u32;
    loop {
        origins.push(pos.min(last));
        if pos >= last {
            break;
        }
        pos = pos.saturating_add(stride);
    }
    origins
}

fn extract_tile(stack: &ChannelStack, row0: u32, col0: u32, spec: &TileSpec) -> TileInput {
    let width = stack.grid.width as usize;
    let mut channels = Vec::with_capacity(stack.channels.len());
    for ch in &stack.channels {
        let mut tile = Vec::with_capacity((spec.tile_w * spec.tile_h) as usize);
        for r in row0..row0 + spec.tile_h {
            let base = r as usize * width + col0 as usize;
            tile.extend_from_slice(&ch.values()[base..base + spec.tile_w as usize]);
        }
        channels.push(tile);
    }
    TileInput {
        origin: (row0, col0),
        width: spec.tile_w,
        height: spec.tile_h,
        cell_size_m: stack.grid.cell_size_m,
        channels,
    }
}

/// Full-scene prediction by tiling. Returns the mosaic and the per-pixel
/// count of eroded tile contributions.
pub fn mosaic_predict_with_counts<F>(
    stack: &ChannelStack,
    spec: &TileSpec,
    parallel: bool,
    predict: F,
) -> Result<(Raster, Vec<u32>)>
where
    F: Fn(&TileInput) -> Result<Vec<f32>> + Sync,
{
    spec.validate()?;
    let grid = stack.grid();
    let spec = spec.clamped_to(grid.width, grid.height);
    let rows = axis_origins(grid.height, spec.tile_h, spec.stride);
    let cols = axis_origins(grid.width, spec.tile_w, spec.stride);
    let origins: Vec<(u32, u32)> = rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
        .collect();

    let expected = (spec.tile_w * spec.tile_h) as usize;
    let run = |&(r, c): &(u32, u32)| -> Result<Vec<f32>> {
        let tile = extract_tile(stack, r, c, &spec);
        let pred = predict(&tile)?;
        if pred.len() != expected {
            return Err(Error::TileShape {
                expected,
                found: pred.len(),
            });
        }
        Ok(pred)
    };
    let predictions: Vec<Vec<f32>> = if parallel {
        origins.par_iter().map(run).collect::<Result<Vec<_>>>()?
    } else {
        origins.iter().map(run).collect::<Result<Vec<_>>>()?
    };

    // Accumulate in tile order so the result is independent of thread count.
    let n = grid.len();
    let width = grid.width as usize;
    let mut sum = vec![0.0f64; n];
    let mut count = vec![0u32; n];
    for (&(row0, col0), pred) in origins.iter().zip(&predictions) {
        let top = if row0 == 0 { 0 } else { spec.erode };
        let bottom = if row0 + spec.tile_h == grid.height {
            spec.tile_h
        } else {
            spec.tile_h - spec.erode
        };
        let left = if col0 == 0 { 0 } else { spec.erode };
        let right = if col0 + spec.tile_w == grid.width {
            spec.tile_w
        } else {
            spec.tile_w - spec.erode
        };
        for tr in top..bottom {
            let out_base = (row0 + tr) as usize * width + col0 as usize;
            let tile_base = tr as usize * spec.tile_w as usize;
            for tc in left..right {
                sum[out_base + tc as usize] += pred[tile_base + tc as usize] as f64;
                count[out_base + tc as usize] += 1;
            }
        }
    }

    if let Some(i) = count.iter().position(|&c| c == 0) {
        return Err(Error::CoverageGap {
            row: (i / width) as u32,
            col: (i % width) as u32,
        });
    }
    let values: Vec<f32> = sum
        .iter()
        .zip(count.iter())
        .map(|(&s, &c)| (s / c as f64) as f32)
        .collect();
    Ok((Raster::new(grid, values)?, count))
}

pub fn mosaic_predict<F>(
    stack: &ChannelStack,
    spec: &TileSpec,
    parallel: bool,
    predict: F,
) -> Result<Raster>
where
    F: Fn(&TileInput) -> Result<Vec<f32>> + Sync,
{
    Ok(mosaic_predict_with_counts(stack, spec, parallel, predict)?.0)
}

/// Per-channel smoothing and standardization applied before a model sees the
/// stack.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChannelPreproc {
    /// Gaussian blur (kernel size, sigma); kernel must be odd.
    pub blur: Option<(usize, f64)>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PreprocConfig {
    pub channels: Vec<ChannelPreproc>,
}

impl PreprocConfig {
    /// The standard four-channel stack in order MAR, PMW, DEM, running-mean
    /// SAR. The coarse MAR and PMW channels get their default blurs; the
    /// normalization statistics must come from the training split.
    pub fn standard_stack(norms: [(f64, f64); 4]) -> PreprocConfig {
        let blurs = [Some((99usize, 33.0f64)), Some((45, 15.0)), None, None];
        PreprocConfig {
            channels: blurs
                .iter()
                .zip(norms.iter())
                .map(|(&blur, &(mean, std))| ChannelPreproc { blur, mean, std })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, ch) in self.channels.iter().enumerate() {
            if let Some((kernel, sigma)) = ch.blur {
                if kernel < 3 || kernel.is_multiple_of(2) || sigma <= 0.0 || sigma.is_nan() {
                    return Err(Error::InvalidParameter(format!(
                        "channel {i}: blur kernel must be odd >= 3 with positive sigma"
                    )));
                }
            }
            if ch.std <= 0.0 || !ch.std.is_finite() {
                return Err(Error::ZeroVariance { channel: i });
            }
        }
        Ok(())
    }
}

/// Blur the configured channels, then standardize each channel to the given
/// mean and standard deviation.
pub fn preprocess_inputs(stack: &ChannelStack, cfg: &PreprocConfig) -> Result<ChannelStack> {
    if cfg.channels.len() != stack.len() {
        return Err(Error::InvalidParameter(format!(
            "preprocessing config covers {} channels, stack has {}",
            cfg.channels.len(),
            stack.len()
        )));
    }
    cfg.validate()?;
    let grid = stack.grid();
    let mut out = Vec::with_capacity(stack.len());
    for (raster, ch) in stack.channels().iter().zip(&cfg.channels) {
        let blurred = match ch.blur {
            Some((kernel, sigma)) => gaussian_blur_f32(
                raster.values(),
                grid.width as usize,
                grid.height as usize,
                kernel,
                sigma,
            ),
            None => raster.values().to_vec(),
        };
        let values = blurred
            .into_iter()
            .map(|v| ((v as f64 - ch.mean) / ch.std) as f32)
            .collect();
        out.push(Raster::new(grid, values)?);
    }
    ChannelStack::new(out)
}

/// Pooled valid-pixel mean and standard deviation across a set of rasters,
/// e.g. one input channel over the training split.
pub fn channel_stats<'a, I: IntoIterator<Item = &'a Raster>>(rasters: I) -> Option<(f64, f64)> {
    let mut n = 0usize;
    let mut sum = 0.0f64;
    let mut sq = 0.0f64;
    for r in rasters {
        for &v in r.values() {
            if !v.is_nan() {
                n += 1;
                sum += v as f64;
                sq += v as f64 * v as f64;
            }
        }
    }
    if n == 0 {
        return None;
    }
    let mean = sum / n as f64;
    let var = (sq / n as f64 - mean * mean).max(0.0);
    Some((mean, var.sqrt()))
}

/// Theoretical receptive field of the reference encoder-decoder after
/// `n_blocks` encoding blocks: the decoder contributes 4 * 2^b pixels and
/// each encoder block doubles the field and adds two 3x3 convolutions,
/// which telescopes to 4 * 2^b + sum_{b'=0..b} 4 * 2^b'. The chain runs
/// 8, 20, 44, 92, 188.
pub fn receptive_field(n_blocks: u32) -> u64 {
    let b = n_blocks;
    4 * 2u64.pow(b) + (0..=b).map(|bp| 4 * 2u64.pow(bp)).sum::<u64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(w: u32, h: u32) -> Grid {
        Grid::new(w, h, 100.0).unwrap()
    }

    fn ramp(g: Grid) -> Raster {
        Raster::from_fn(g, |r, c| ((r * 31 + c * 17) % 101) as f32 / 101.0)
    }

    #[test]
    fn receptive_field_chain() {
        assert_eq!(receptive_field(0), 8);
        assert_eq!(receptive_field(1), 20);
        assert_eq!(receptive_field(2), 44);
        assert_eq!(receptive_field(3), 92);
        assert_eq!(receptive_field(4), 188);
    }

    #[test]
    fn sampling_is_deterministic_and_degenerate_grid_has_one_origin() {
        let g = grid(64, 48);
        let spec = TileSpec::new(64, 48, 1, 0).unwrap();
        let origins = sample_tiles(g, &spec, 10, 7).unwrap();
        assert!(origins.iter().all(|&o| o == (0, 0)));

        let spec = TileSpec::new(16, 16, 8, 2).unwrap();
        let a = sample_tiles(g, &spec, 100, 42).unwrap();
        let b = sample_tiles(g, &spec, 100, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_tiles(g, &spec, 100, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_origins_are_uniform() {
        // 10^4 origins of 512 tiles on a 1024^2 grid, binned 3x3 over the
        // 513x513 origin range (an exact multiple of 3). Chi-squared with 8
        // degrees of freedom stays below 20.09 at the 0.01 level.
        let g = Grid::new(1024, 1024, 100.0).unwrap();
        let spec = TileSpec::new(512, 512, 480, 16).unwrap();
        let origins = sample_tiles(g, &spec, 10_000, 99).unwrap();
        let mut bins = [0usize; 9];
        for (r, c) in origins {
            bins[(r / 171).min(2) as usize * 3 + (c / 171).min(2) as usize] += 1;
        }
        let expected = 10_000.0 / 9.0;
        let chi2: f64 = bins
            .iter()
            .map(|&o| (o as f64 - expected).powi(2) / expected)
            .sum();
        assert!(
            chi2 < 20.09,
            "chi-squared {chi2} rejects uniformity: {bins:?}"
        );
    }

    #[test]
    fn oversized_tile_is_rejected() {
        let g = grid(32, 32);
        let spec = TileSpec::new(64, 64, 32, 0).unwrap();
        assert!(matches!(
            sample_tiles(g, &spec, 1, 0),
            Err(Error::TileTooLarge { .. })
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(TileSpec::new(512, 512, 480, 16).is_ok());
        // Erode of half the tile leaves nothing.
        assert!(TileSpec::new(32, 32, 1, 16).is_err());
        // Stride beyond the eroded extent leaves gaps.
        assert!(TileSpec::new(32, 32, 29, 2).is_err());
        assert!(TileSpec::new(32, 32, 0, 2).is_err());
    }

    #[test]
    fn eroded_extent_of_the_default_spec_equals_its_stride() {
        let spec = TileSpec::default();
        assert_eq!(spec.tile_w - 2 * spec.erode, spec.stride);
    }

    #[test]
    fn identity_mosaic_is_exact() {
        let g = grid(97, 61);
        let stack = ChannelStack::new(vec![ramp(g)]).unwrap();
        let spec = TileSpec::new(32, 24, 17, 3).unwrap();
        let out = mosaic_predict(&stack, &spec, true, |tile: &TileInput| {
            Ok(tile.channel(0).to_vec())
        })
        .unwrap();
        assert!(out.bits_eq(&stack.channels()[0]));
    }

    #[test]
    fn overlapping_tiles_average() {
        // Stride 2 with a 4-wide tile and no erosion makes interior pixels
        // belong to multiple tiles; a predictor that keys on the tile origin
        // exposes the averaging.
        let g = grid(8, 4);
        let stack = ChannelStack::new(vec![Raster::filled(g, 0.0)]).unwrap();
        let spec = TileSpec::new(4, 4, 2, 0).unwrap();
        let out = mosaic_predict(&stack, &spec, false, |tile: &TileInput| {
            let v = if tile.origin.1 == 0 { 0.2 } else { 0.4 };
            Ok(vec![v; (tile.width * tile.height) as usize])
        })
        .unwrap();
        // Columns 2 and 3 are covered by the origin-0 tile (0.2) and one
        // shifted tile (0.4).
        assert!((out.get(0, 2) - 0.3).abs() < 1e-7);
        assert!((out.get(0, 3) - 0.3).abs() < 1e-7);
    }

    #[test]
    fn wrong_tile_shape_is_rejected() {
        let g = grid(16, 16);
        let stack = ChannelStack::new(vec![ramp(g)]).unwrap();
        let spec = TileSpec::new(8, 8, 4, 1).unwrap();
        let err = mosaic_predict(&stack, &spec, false, |_| Ok(vec![0.0; 3]));
        assert!(matches!(
            err,
            Err(Error::TileShape {
                expected: 64,
                found: 3
            })
        ));
    }

    #[test]
    fn preprocess_standardizes_and_blurs() {
        let g = grid(8, 8);
        let stack = ChannelStack::new(vec![Raster::filled(g, 7.0)]).unwrap();
        let cfg = PreprocConfig {
            channels: vec![ChannelPreproc {
                blur: Some((3, 1.0)),
                mean: 5.0,
                std: 2.0,
            }],
        };
        let out = preprocess_inputs(&stack, &cfg).unwrap();
        for &v in out.channels()[0].values() {
            assert!((v - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_std_is_rejected() {
        let g = grid(4, 4);
        let stack = ChannelStack::new(vec![Raster::filled(g, 1.0)]).unwrap();
        let cfg = PreprocConfig {
            channels: vec![ChannelPreproc {
                blur: None,
                mean: 1.0,
                std: 0.0,
            }],
        };
        assert!(matches!(
            preprocess_inputs(&stack, &cfg),
            Err(Error::ZeroVariance { channel: 0 })
        ));
    }

    #[test]
    fn channel_stats_pool_valid_pixels() {
        let g = grid(2, 1);
        let a = Raster::new(g, vec![1.0, f32::NAN]).unwrap();
        let b = Raster::new(g, vec![3.0, f32::NAN]).unwrap();
        let (mean, std) = channel_stats([&a, &b]).unwrap();
        assert!((mean - 2.0).abs() < 1e-12);
        assert!((std - 1.0).abs() < 1e-12);
        let empty = Raster::filled(g, f32::NAN);
        assert!(channel_stats([&empty]).is_none());
    }

    fn legal_spec() -> impl Strategy<Value = TileSpec> {
        (8u32..48)
            .prop_flat_map(|tile| (Just(tile), 0u32..(tile / 2).min(8)))
            .prop_flat_map(|(tile, erode)| (Just(tile), Just(erode), 1u32..=(tile - 2 * erode)))
            .prop_map(|(tile, erode, stride)| TileSpec {
                tile_w: tile,
                tile_h: tile,
                stride,
                erode,
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn identity_mosaic_over_random_legal_specs(spec in legal_spec(), w in 40u32..90, h in 40u32..90) {
            spec.validate().unwrap();
            let g = grid(w, h);
            let stack = ChannelStack::new(vec![ramp(g)]).unwrap();
            let out = mosaic_predict(&stack, &spec, false, |t: &TileInput| Ok(t.channel(0).to_vec())).unwrap();
            prop_assert!(out.bits_eq(&stack.channels()[0]));
        }

        #[test]
        fn divisor_matches_geometric_coverage(spec in legal_spec()) {
            let g = grid(73, 53);
            let stack = ChannelStack::new(vec![Raster::filled(g, 0.5)]).unwrap();
            let (_, counts) = mosaic_predict_with_counts(
                &stack, &spec, false, |t: &TileInput| Ok(t.channel(0).to_vec())).unwrap();
            // Independent count: enumerate tiles and mark kept regions.
            let s = spec.clamped_to(g.width, g.height);
            let mut expected = vec![0u32; g.len()];
            for &r0 in &axis_origins(g.height, s.tile_h, s.stride) {
                for &c0 in &axis_origins(g.width, s.tile_w, s.stride) {
                    let top = if r0 == 0 { 0 } else { s.erode };
                    let bottom = if r0 + s.tile_h == g.height { s.tile_h } else { s.tile_h - s.erode };
                    let left = if c0 == 0 { 0 } else { s.erode };
                    let right = if c0 + s.tile_w == g.width { s.tile_w } else { s.tile_w - s.erode };
                    for tr in top..bottom {
                        for tc in left..right {
                            expected[((r0 + tr) * g.width + c0 + tc) as usize] += 1;
                        }
                    }
                }
            }
            prop_assert_eq!(counts, expected);
        }
    }
}
