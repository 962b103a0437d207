//! Separable Gaussian convolution with reflection padding.
//!
//! Shared by the SSIM windows, the input-smoothing blurs, and the synthetic
//! terrain generator. Accumulation is in f64 regardless of the stored type.

/// Normalized Gaussian taps for a window of `size` samples.
///
/// Tap `j` sits at integer offset `j - size / 2` from the output pixel, so an
/// even window spans offsets `-size/2 ..= size/2 - 1`. The Gaussian itself is
/// sampled at `j - (size - 1) / 2`: integer positions for odd sizes,
/// half-integer positions for even sizes, which keeps the weights symmetric
/// within the window.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    assert!(size >= 1 && sigma > 0.0);
    let center = (size as f64 - 1.0) / 2.0;
    let mut taps: Vec<f64> = (0..size)
        .map(|j| {
            let d = j as f64 - center;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Reflect an out-of-range index into `[0, n)` without repeating the edge
/// sample, bouncing as many times as needed. Requires `n >= 1`.
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    debug_assert!(n >= 1);
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut m = i.rem_euclid(period);
    if m >= n as isize {
        m = period - m;
    }
    m as usize
}

/// Horizontal pass of a separable convolution over a row-major `width x height`
/// buffer.
pub fn convolve_rows(src: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    debug_assert_eq!(src.len(), width * height);
    let half = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; src.len()];
    for row in 0..height {
        let base = row * width;
        let line = &src[base..base + width];
        for col in 0..width {
            let mut acc = 0.0;
            for (j, &w) in kernel.iter().enumerate() {
                let idx = reflect_index(col as isize + j as isize - half, width);
                acc += w * line[idx];
            }
            out[base + col] = acc;
        }
    }
    out
}

/// Vertical pass of a separable convolution.
pub fn convolve_cols(src: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    debug_assert_eq!(src.len(), width * height);
    let half = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; src.len()];
    for col in 0..width {
        for row in 0..height {
            let mut acc = 0.0;
            for (j, &w) in kernel.iter().enumerate() {
                let idx = reflect_index(row as isize + j as isize - half, height);
                acc += w * src[idx * width + col];
            }
            out[row * width + col] = acc;
        }
    }
    out
}

pub fn convolve_separable(src: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let mid = convolve_rows(src, width, height, kernel);
    convolve_cols(&mid, width, height, kernel)
}

/// Gaussian blur of an f32 buffer via the separable f64 pipeline.
pub fn gaussian_blur_f32(
    values: &[f32],
    width: usize,
    height: usize,
    kernel_size: usize,
    sigma: f64,
) -> Vec<f32> {
    let kernel = gaussian_kernel(kernel_size, sigma);
    let src: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    convolve_separable(&src, width, height, &kernel)
        .into_iter()
        .map(|v| v as f32)
        .collect()
}
