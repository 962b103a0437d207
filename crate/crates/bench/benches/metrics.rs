use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use meltkit_bench::masked_raster;
use meltkit_core::metrics::{classification_metrics, masked_ssim, spatial_error, SsimConfig};
use meltkit_core::series::DatedRaster;

fn series_pair(width: u32, height: u32) -> (Vec<DatedRaster>, Vec<DatedRaster>) {
    let date = "2019-06-12".parse().unwrap();
    let t = vec![DatedRaster::new(date, masked_raster(1, width, height, 0.4))];
    let p = vec![DatedRaster::new(date, masked_raster(2, width, height, 0.0))];
    (t, p)
}

fn bench_metrics(c: &mut Criterion) {
    let (t512, p512) = series_pair(512, 384);
    c.bench_function("spatial_error_mse_512x384", |b| {
        b.iter(|| spatial_error(black_box(&t512), black_box(&p512), 2).unwrap())
    });
    c.bench_function("classification_512x384", |b| {
        b.iter(|| classification_metrics(black_box(&t512), black_box(&p512), 0.1).unwrap())
    });

    let (t256, p256) = series_pair(256, 256);
    let cfg = SsimConfig::default();
    let mut group = c.benchmark_group("ssim");
    group.sample_size(10);
    group.bench_function("masked_ssim_256x256_w72", |b| {
        b.iter(|| masked_ssim(black_box(&t256), black_box(&p256), &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_metrics);
criterion_main!(benches);
