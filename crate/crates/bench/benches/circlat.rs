use std::hint::black_box;

use circlat::bayes::{changepoint_fit, ChangepointModel, McmcConfig};
use circlat::distributions::{pmf_cdwc, pmf_mdvm, pmf_mdwc, LocationFamily};
use circlat::divergence::{max_divergence_scan, scan_grid};
use circlat::inference::{mle, summarize, test_serial};
use circlat::torus::biv_mdwc;
use circlat::RngSeed;
use circlat_bench::{cdwc_sample, lattice, switch_sample};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn pmfs(c: &mut Criterion) {
    let mut g = c.benchmark_group("pmf");
    for m in [10, 37, 1000] {
        let l = lattice(m);
        g.bench_with_input(BenchmarkId::new("cdwc", m), &l, |b, &l| b.iter(|| pmf_cdwc(l, black_box(0.7), 0)));
        g.bench_with_input(BenchmarkId::new("mdwc", m), &l, |b, &l| b.iter(|| pmf_mdwc(l, black_box(0.7), 0.0)));
        g.bench_with_input(BenchmarkId::new("mdvm", m), &l, |b, &l| b.iter(|| pmf_mdvm(l, black_box(3.0), 0.0)));
    }
    g.finish();
}

fn estimation(c: &mut Criterion) {
    let l = lattice(37);
    let data = cdwc_sample(37, 0.1, 8000);
    let s = summarize(&data, l, 2).unwrap();
    let mut g = c.benchmark_group("mle");
    for fam in [LocationFamily::Cdvm, LocationFamily::Cdwc, LocationFamily::Mdwc] {
        g.bench_function(fam.name(), |b| b.iter(|| mle(black_box(&s), fam)));
    }
    g.finish();
    c.bench_function("serial_test_999", |b| b.iter(|| test_serial(&data, l, 999, RngSeed(1))));
}

fn divergence(c: &mut Criterion) {
    let grid = scan_grid(0.01, 0.995);
    let l = lattice(37);
    c.bench_function("scan_cdwc_m37_step0.01", |b| b.iter(|| max_divergence_scan(LocationFamily::Cdwc, l, &grid)));
}

fn bayes(c: &mut Criterion) {
    let data = switch_sample(37, 1000);
    let model = ChangepointModel::new(lattice(37));
    let cfg = McmcConfig { iterations: 4000, burnin: 1000, ..McmcConfig::default() };
    let mut g = c.benchmark_group("bayes");
    g.sample_size(10);
    g.bench_function("changepoint_n1000_4k", |b| b.iter(|| changepoint_fit(&data, &model, &cfg, RngSeed(2))));
    g.finish();
}

fn torus(c: &mut Criterion) {
    c.bench_function("biv_mdwc_m37", |b| b.iter(|| biv_mdwc(lattice(37), black_box(0.5), 0.3)));
}

criterion_group!(benches, pmfs, estimation, divergence, bayes, torus);
criterion_main!(benches);
