use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use e2evrp_bench::{metro, routes};
use e2evrp_core::{insert_stations, lns_run_with, price_ng_routes, LnsParams, Multigraph, NgLimits, NgSets};

fn charging(c: &mut Criterion) {
    let inst = metro(1, 20, 1000);
    let graph = Multigraph::new(&inst);
    let sat = inst.satellite_vertex(0);
    let rs = routes(&inst, 10);
    c.bench_function("insert_stations/10-customer routes", |b| {
        b.iter(|| {
            for r in &rs {
                black_box(insert_stations(&inst, &graph, sat, r));
            }
        })
    });
}

fn multigraph(c: &mut Criterion) {
    let mut g = c.benchmark_group("multigraph");
    for stations in [5, 50] {
        let inst = metro(1, stations, 1000);
        g.bench_function(format!("reduced/r{stations}"), |b| b.iter(|| Multigraph::new(black_box(&inst))));
    }
    g.finish();
}

fn search(c: &mut Criterion) {
    let inst = metro(1, 20, 1000);
    let graph = Multigraph::new(&inst);
    let mut g = c.benchmark_group("lns");
    g.sample_size(10);
    g.bench_function("100 iterations", |b| {
        b.iter_batched(
            || LnsParams { max_iterations: Some(100), t_max: 1e9, seed: 1, ..LnsParams::default() },
            |p| lns_run_with(&inst, &graph, &p),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

fn pricing(c: &mut Criterion) {
    let inst = metro(2, 3, 1000);
    let graph = Multigraph::new(&inst);
    let ng = NgSets::nearest(&inst, 4).unwrap();
    let mut g = c.benchmark_group("ng");
    g.sample_size(10);
    g.bench_function("price one satellite", |b| {
        b.iter(|| price_ng_routes(&inst, &graph, inst.satellite_vertex(0), &ng, NgLimits::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, charging, multigraph, search, pricing);
criterion_main!(benches);
