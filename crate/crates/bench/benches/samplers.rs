use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gffmax_core::sampler::{DenseSampler, SamplerScratch, SpectralSampler};
use gffmax_core::{green_dense, BoxSpec, Field, SeedSpec, DEFAULT_DENSE_CAP};
use std::hint::black_box;

fn spectral(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_sample");
    for n in [5u32, 7, 9, 10] {
        let b = BoxSpec::new(n).unwrap();
        let sampler = SpectralSampler::new(b).unwrap();
        let mut scratch = SamplerScratch::default();
        let mut field = Field::zeros(b);
        let mut i = 0u64;
        group.bench_with_input(BenchmarkId::from_parameter(b.side()), &b, |bench, _| {
            bench.iter(|| {
                i += 1;
                sampler.sample_into(SeedSpec::new(1, 0).nth(i), &mut scratch, &mut field);
                black_box(&field);
            })
        });
    }
    group.finish();
}

fn dense(c: &mut Criterion) {
    let mut group = c.benchmark_group("dense_sample");
    for n in [3u32, 4, 5] {
        let b = BoxSpec::new(n).unwrap();
        let sampler = DenseSampler::new(&green_dense(b, DEFAULT_DENSE_CAP).unwrap()).unwrap();
        let mut i = 0u64;
        group.bench_with_input(BenchmarkId::from_parameter(b.side()), &b, |bench, _| {
            bench.iter(|| {
                i += 1;
                black_box(sampler.sample(SeedSpec::new(1, 0).nth(i)))
            })
        });
    }
    group.finish();
}

fn green(c: &mut Criterion) {
    let mut group = c.benchmark_group("green_dense");
    group.sample_size(10);
    for n in [3u32, 4, 5] {
        let b = BoxSpec::new(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(b.side()), &b, |bench, &b| {
            bench.iter(|| black_box(green_dense(b, DEFAULT_DENSE_CAP).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, spectral, dense, green);
criterion_main!(benches);
