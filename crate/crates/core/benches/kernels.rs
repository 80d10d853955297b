//! Parallel kernels against the same kernels pinned to one thread.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use warpsym::bundles::{mc_minkowski_perimeter, BundleSpace};
use warpsym::measure::{distance_field, minkowski_perimeter, DistanceMethod, MinkowskiOptions};
use warpsym::symmetrize::schwarz_grid;
use warpsym::verify::{grid_scenario, mc_radii, BundleScenario};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    vec![("sequential", one), ("parallel", all)]
}

fn grid_kernels(c: &mut Criterion) {
    let sc = grid_scenario("rosales-offset-disk").unwrap();
    let region = sc.region.to_grid(sc.scheme(0.01).unwrap());
    let opts = MinkowskiOptions::default();
    let mut g = c.benchmark_group("grid");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_with_input(BenchmarkId::new("distance_field", name), &pool, |b, p| {
            b.iter(|| p.install(|| distance_field(&sc.space, black_box(&region), 0.1, DistanceMethod::Exact).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("schwarz_grid", name), &pool, |b, p| {
            b.iter(|| p.install(|| schwarz_grid(&sc.space, black_box(&region)).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("minkowski_perimeter", name), &pool, |b, p| {
            b.iter(|| p.install(|| minkowski_perimeter(&sc.space, black_box(&region), &opts).unwrap()))
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let bundle = BundleSpace::hopf();
    let shape = BundleScenario::Tube.shape();
    let radii = mc_radii();
    let mut g = c.benchmark_group("bundle");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_with_input(BenchmarkId::new("mc_minkowski_perimeter", name), &pool, |b, p| {
            b.iter(|| p.install(|| mc_minkowski_perimeter(&bundle, black_box(&shape), &radii, 20_000, 7).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, grid_kernels, monte_carlo);
criterion_main!(benches);
