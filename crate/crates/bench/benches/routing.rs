use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pylon_bench::{convex_cost, raster_route, step_cost};
use pylon_core::anglebf::mabf;
use pylon_core::multiscale::run_multiscale;
use pylon_core::{KernelChoice, MultiScalePlan, RouteGraph};

fn mabf_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("mabf_80x80");
    group.sample_size(10);
    for (name, f, fast) in [("convex", convex_cost(), KernelChoice::Convex), ("step", step_cost(), KernelChoice::Step)] {
        let (raster, sc) = raster_route(80, 5.0, f.clone());
        let g = RouteGraph::build(&raster, &sc).unwrap();
        for kernel in [KernelChoice::Naive, fast] {
            group.bench_function(BenchmarkId::new(name, kernel.name()), |b| {
                b.iter(|| mabf(&g, &f, kernel, sc.path_limit()).unwrap())
            });
        }
    }
    group.finish();
}

fn multiscale(c: &mut Criterion) {
    let mut group = c.benchmark_group("route_120x120");
    group.sample_size(10);
    let (raster, sc) = raster_route(120, 6.0, convex_cost());
    group.bench_function("direct", |b| b.iter(|| pylon_core::solve_route(&raster, &sc).unwrap()));
    for scales in [vec![2, 1], vec![3, 2, 1]] {
        let plan = MultiScalePlan::new(scales.clone(), usize::MAX);
        group.bench_function(BenchmarkId::new("multiscale", format!("{scales:?}")), |b| {
            b.iter(|| run_multiscale(&raster, &sc, &plan).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, mabf_kernels, multiscale);
criterion_main!(benches);
