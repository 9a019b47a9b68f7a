use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gffmax_core::brw::{brw_maxima, DEFAULT_LEAF_BUDGET};
use gffmax_core::hierarchy::Hierarchy;
use gffmax_core::{brw_cdf_step, brw_run, sample_spectral, BoxSpec, BrwSpec, CdfGrid, SeedSpec};
use std::hint::black_box;

fn cdf_step(c: &mut Criterion) {
    let spec = BrwSpec::new(4, 1.0, 30).unwrap();
    let run = brw_run(&spec).unwrap();
    let mut group = c.benchmark_group("brw_cdf_step");
    for t in [1usize, 10, 29] {
        let grid: &CdfGrid = &run.grids[t];
        group.bench_with_input(BenchmarkId::from_parameter(t), grid, |bench, g| {
            bench.iter(|| black_box(brw_cdf_step(g, &spec, 1).unwrap()))
        });
    }
    group.finish();
}

fn full_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("brw_run");
    group.sample_size(10);
    let spec = BrwSpec::new(4, 1.0, 30).unwrap();
    group.bench_function("depth30", |bench| bench.iter(|| black_box(brw_run(&spec).unwrap())));
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let spec = BrwSpec::new(4, 1.0, 6).unwrap();
    c.bench_function("brw_maxima_depth6_x16", |bench| {
        bench.iter(|| black_box(brw_maxima(&spec, 16, SeedSpec::new(1, 0), 1, DEFAULT_LEAF_BUDGET).unwrap()))
    });
}

fn decomposition(c: &mut Criterion) {
    let mut group = c.benchmark_group("decompose");
    for n in [5u32, 7] {
        let b = BoxSpec::new(n).unwrap();
        let h = Hierarchy::new(b).unwrap();
        let f = sample_spectral(b, SeedSpec::new(2, 0)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(b.side()), &f, |bench, f| {
            bench.iter(|| black_box(h.decompose(f).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, cdf_step, full_run, simulation, decomposition);
criterion_main!(benches);
