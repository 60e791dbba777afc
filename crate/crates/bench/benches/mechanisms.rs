use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use rm_auctions::rng::seeded;
use rm_auctions::verify::{check_ic, Caii, Mcaii, Mechanism};
use rm_auctions::welfare::{max_welfare, vcg};
use rm_auctions::{caii, mcaii};
use rm_auctions_bench::{flat_suite, golden, grouped_suite, sized};

fn allocation(c: &mut Criterion) {
    let flat = flat_suite(200);
    let grouped = grouped_suite(200);
    let mut g = c.benchmark_group("allocate");
    g.bench_function("caii/golden", |b| b.iter(|| caii::allocate(black_box(&golden()))));
    g.bench_function("caii/suite200", |b| {
        b.iter(|| flat.iter().for_each(|p| drop(black_box(caii::expected_revenue(p)))))
    });
    g.bench_function("mcaii/suite200", |b| {
        b.iter(|| grouped.iter().for_each(|p| drop(black_box(mcaii::expected_revenue(p)))))
    });
    for n in [10, 100, 1000] {
        let p = sized(n, 64);
        g.bench_with_input(BenchmarkId::new("caii/n", n), &p, |b, p| b.iter(|| caii::allocate(p)));
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let plan = Caii.plan(&golden());
    let mut rng = seeded(1);
    c.bench_function("draw/caii/golden", |b| b.iter(|| Caii.draw(&plan, &mut rng)));
    let grouped = grouped_suite(1).remove(0);
    let plan = Mcaii.plan(&grouped);
    c.bench_function("draw/mcaii", |b| b.iter(|| Mcaii.draw(&plan, &mut rng)));
}

fn welfare(c: &mut Criterion) {
    let mut g = c.benchmark_group("welfare");
    for n in [10, 20, 100] {
        let p = sized(n, 64);
        g.bench_with_input(BenchmarkId::new("dp/n", n), &p, |b, p| b.iter(|| max_welfare(p)));
    }
    let p = sized(20, 64);
    g.bench_function("vcg/n20", |b| b.iter(|| vcg(&p)));
    g.finish();
}

fn verification(c: &mut Criterion) {
    let p = golden();
    c.bench_function("check_ic/caii/golden", |b| b.iter(|| check_ic(&Caii, &p, 4, 0).unwrap()));
}

criterion_group!(benches, allocation, sampling, welfare, verification);
criterion_main!(benches);
