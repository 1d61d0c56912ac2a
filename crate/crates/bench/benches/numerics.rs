use ckn_core::extremals::bubble;
use ckn_core::functionals::{best_constant_report, deficit};
use ckn_core::ineq::{search_constant, ConstantKind};
use ckn_core::manifold::distance_to_manifold;
use ckn_core::regions::region_map;
use ckn_core::spectral::{assemble, eigen_solve};
use ckn_core::stability::{log_grid, scan_directions, stability_scan};
use ckn_core::{CknParams, QuadratureSpec};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn tuples() -> Vec<CknParams> {
    ckn_core::acceptance::suite()
}

fn functionals(c: &mut Criterion) {
    let spec = QuadratureSpec::default();
    let mut g = c.benchmark_group("functionals");
    for params in tuples() {
        let id = params.key();
        g.bench_with_input(BenchmarkId::new("best_constant", &id), &params, |b, p| {
            b.iter(|| best_constant_report(black_box(p), &spec).unwrap())
        });
        let u = bubble(&params).scaled(1.3);
        g.bench_with_input(BenchmarkId::new("deficit", &id), &params, |b, p| {
            b.iter(|| deficit(black_box(&u), p, &spec).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("distance", &id), &params, |b, p| {
            b.iter(|| distance_to_manifold(black_box(&u), p, &spec).unwrap())
        });
    }
    g.finish();
}

fn spectrum(c: &mut Criterion) {
    let params = CknParams::validate(5, 2.0, 1.0, 2.0).unwrap();
    let mut g = c.benchmark_group("eigen_solve");
    g.sample_size(10);
    for grid in [512usize, 2048] {
        let problem = assemble(&params, 1);
        g.bench_with_input(BenchmarkId::from_parameter(grid), &grid, |b, &n| {
            b.iter(|| eigen_solve(black_box(&problem), 3, n).unwrap())
        });
    }
    g.finish();
}

fn stability(c: &mut Criterion) {
    let spec = QuadratureSpec::default();
    let params = CknParams::validate(4, 1.5, 0.5, 1.0).unwrap();
    let w = scan_directions(&params, &spec).unwrap().remove(0);
    let eps = log_grid(1e-3, 1e-1, 12);
    let mut g = c.benchmark_group("stability");
    g.sample_size(10);
    g.bench_function("scan_12", |b| b.iter(|| stability_scan(&params, black_box(&w), &eps, &spec).unwrap()));
    g.bench_function("search_c1", |b| b.iter(|| search_constant(ConstantKind::C1, 1.5, 0.1, 5_000, 7).unwrap()));
    g.finish();
}

fn regions(c: &mut Criterion) {
    let mut g = c.benchmark_group("regions");
    g.sample_size(10);
    g.bench_function("map_50x50_p3", |b| b.iter(|| region_map(5, black_box(3.0), (-3.0, 0.6), (-3.0, 1.6), 50, 50)));
    g.finish();
}

criterion_group!(benches, functionals, spectrum, stability, regions);
criterion_main!(benches);
