use criterion::{criterion_group, criterion_main, Criterion};
use sdesym_bench::{messy, problem};
use sdesym_core::{corpus, invariance_residual, Mode, SamplingConfig};
use std::hint::black_box;

fn canonical(c: &mut Criterion) {
    let p = problem("gbm");
    let e = messy(&p);
    let d0 = p.system.d0(&e).unwrap();
    c.bench_function("normalize", |b| b.iter(|| black_box(&e).normalize().unwrap()));
    c.bench_function("d0", |b| b.iter(|| p.system.d0(black_box(&e)).unwrap()));
    c.bench_function("zero-test d0", |b| b.iter(|| (black_box(&d0).clone() - d0.clone()).is_zero_canonical().unwrap()));
}

fn checks(c: &mut Criterion) {
    let p = problem("gbm");
    let y1 = p.candidate("kbe:Y1").unwrap();
    let x2 = p.candidate("sde:X2").unwrap();
    let symbolic = SamplingConfig::default().with_mode(Mode::Symbolic);
    let numeric = SamplingConfig::default().with_mode(Mode::Numeric);
    c.bench_function("gbm kbe Y1 symbolic", |b| b.iter(|| y1.check(&p.system, &symbolic).unwrap()));
    c.bench_function("gbm kbe Y1 numeric", |b| b.iter(|| y1.check(&p.system, &numeric).unwrap()));
    c.bench_function("gbm sde X2", |b| b.iter(|| x2.check(&p.system, &symbolic).unwrap()));
    let kbe = p.system.kbe();
    c.bench_function("gbm jet residual Y1", |b| b.iter(|| invariance_residual(&kbe, &y1.field).unwrap()));
}

fn catalog(c: &mut Criterion) {
    let cfg = SamplingConfig::default();
    let mut g = c.benchmark_group("catalog");
    g.sample_size(10);
    g.bench_function("kfamily", |b| b.iter(|| corpus::run_case("kfamily", &cfg).unwrap()));
    g.bench_function("all", |b| b.iter(|| corpus::run_all(&cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, canonical, checks, catalog);
criterion_main!(benches);
