use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use rigidity_core::calculus::{flow, FlowParams, FnField};
use rigidity_core::dolbeault::{cauchy_riemann, ComplexGridFunction};
use rigidity_core::grid::{Box, GridSection, GridSpec};
use rigidity_core::smoothing::{smooth, Mollifier};
use std::hint::black_box;

// Compare runs with and without `--no-default-features`.
const MODE: &str = if cfg!(feature = "parallel") { "parallel" } else { "sequential" };

fn smoothing(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("smooth/{MODE}"));
    let kernel = Mollifier::default();
    for n in [65, 129] {
        let spec = GridSpec::uniform(Box::cube(2, 2.0), n).unwrap();
        let e = GridSection::from_scalar_fn(spec, |x| (3.0 * x[0]).sin() * x[1].cos());
        group.bench_with_input(BenchmarkId::from_parameter(n), &e, |b, e| b.iter(|| smooth(black_box(e), 2.0, &kernel).unwrap()));
    }
    group.finish();
}

fn flows(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("flow/{MODE}"));
    group.sample_size(10);
    let v = FnField { dim: 2, f: |_t: f64, x: &[f64], o: &mut [f64]| {
        o[0] = 0.05 * x[1].sin();
        o[1] = -0.05 * x[0].sin();
    } };
    let outer = Box::cube(2, 2.0);
    for n in [33, 65] {
        let b = GridSpec::uniform(Box::cube(2, 1.0), n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &b, |bch, b| {
            bch.iter(|| flow(&v, 1.0, black_box(b), &outer, &FlowParams::default()).unwrap())
        });
    }
    group.finish();
}

fn cauchy(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("cauchy/{MODE}"));
    group.sample_size(10);
    for n in [48, 64] {
        let f = ComplexGridFunction::from_fn(1.0, n, |z| z * z.conj() + Complex64::new(0.0, 1.0) * z).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| b.iter(|| cauchy_riemann(black_box(f), 1.0, 0.5).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, smoothing, flows, cauchy);
criterion_main!(benches);
