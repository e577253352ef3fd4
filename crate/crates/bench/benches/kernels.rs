//! Throughput of the hot kernels: field evaluation, the extremal-count
//! sweep, the transported-mass integral, and Gram assembly + bounds.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use gabden_bench::{default_gaussian, unit_lattice_window};
use gabden_core::frames::{gram_matrix, riesz_bounds, GaborSection};
use gabden_core::pointset::{extremal_counts, Cube};
use gabden_core::stft::{stft_field, PhaseGrid};
use gabden_core::verify::{centered_field, error_integral, point_estimate_constant};

fn bench_stft_field(c: &mut Criterion) {
    let g = default_gaussian();
    let mut group = c.benchmark_group("stft_field");
    group.sample_size(10);
    for half in [2.0_f64, 4.0] {
        let grid = PhaseGrid::centered(half, 0.1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(grid.len()), &grid, |b, grid| {
            b.iter(|| stft_field(black_box(&g), grid).unwrap());
        });
    }
    group.finish();
}

fn bench_extremal_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("extremal_counts");
    group.sample_size(20);
    for half in [5.0_f64, 10.0] {
        let ps = unit_lattice_window(half);
        let search = Cube::new((0.0, 0.0), 1.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(ps.len()), &ps, |b, ps| {
            b.iter(|| extremal_counts(black_box(ps), 2.0, &search));
        });
    }
    group.finish();
}

fn bench_error_integral(c: &mut Criterion) {
    let g = default_gaussian();
    let field = centered_field(&g, 8.0, 0.1).unwrap();
    c.bench_function("error_integral_161x161", |b| {
        b.iter(|| error_integral(black_box(&field), 4.0).unwrap());
    });
}

fn bench_gram_bounds(c: &mut Criterion) {
    let g = default_gaussian();
    let ps = unit_lattice_window(2.5);
    let section = GaborSection::from_points(g, &ps, None).unwrap();
    c.bench_function("gram_bounds_25_atoms", |b| {
        b.iter(|| {
            let gm = gram_matrix(black_box(&section)).unwrap();
            riesz_bounds(&gm).unwrap()
        });
    });
}

fn bench_point_estimate(c: &mut Criterion) {
    let mut group = c.benchmark_group("point_estimate_constant");
    group.sample_size(10);
    group.bench_function("delta_1_100_trials", |b| {
        b.iter(|| point_estimate_constant(black_box(1.0), 100, 7).unwrap());
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_stft_field,
    bench_extremal_sweep,
    bench_error_integral,
    bench_gram_bounds,
    bench_point_estimate
);
criterion_main!(benches);
