use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_bigint::BigInt;
use num_rational::BigRational;
use oiforge::dio::{dio_search, discrepancy, SearchSpec};
use oiforge::genpoly::compile_sigma;
use oiforge::padic::hensel_root;
use oiforge::ringlab::{discreteness_scan, DEFAULT_CAP};
use oiforge::{PrecisionCtx, WorkspaceSpec};

const SEQUENCE: &str = "
[field]
sqrt = 2
[symbols]
r1 = 0.30103
r2 = 1/3
[sequence]
g0 = t
g1 = sqrt(2)*t - r1
g2 = 2*sqrt(2)*r1*t - r2
";

const RING: &str = "
[field]
sqrt = 2
[symbols]
r1 = 0.30103
r2 = 1/3
[generators]
g0 = t
g1 = sqrt(2)*t - r1
g2 = 2*sqrt(2)*r1*t - r2
";

fn kernel(c: &mut Criterion) {
    let ring = WorkspaceSpec::parse(RING).unwrap().ring().unwrap();
    let mut g = c.benchmark_group("discreteness_scan");
    g.sample_size(10);
    for degree in [2u32, 3] {
        g.bench_function(format!("degree {degree}"), |b| {
            b.iter(|| discreteness_scan(black_box(&ring), degree, DEFAULT_CAP).unwrap())
        });
    }
    g.finish();
}

fn hensel(c: &mut Criterion) {
    // x^2 - 17 over the 2-adics, ascending coefficients
    let g = vec![BigInt::from(-17), BigInt::from(0), BigInt::from(1)];
    c.bench_function("hensel x^2-17 mod 2^200", |b| b.iter(|| hensel_root(black_box(&g), 2, 200).unwrap()));
}

fn search(c: &mut Criterion) {
    let ctx = PrecisionCtx::default();
    let sys = compile_sigma(&WorkspaceSpec::parse(SEQUENCE).unwrap().sequence().unwrap());
    let spec = SearchSpec::new(&sys, BigRational::new(1.into(), 50.into()), 20_000);
    let mut g = c.benchmark_group("dio_search");
    g.sample_size(10);
    g.bench_function("two-step, Y = 2e4", |b| b.iter(|| dio_search(black_box(&spec), &ctx).unwrap()));
    g.finish();
}

fn star_discrepancy(c: &mut Criterion) {
    let ctx = PrecisionCtx::default();
    let sys = compile_sigma(&WorkspaceSpec::parse(SEQUENCE).unwrap().sequence().unwrap());
    let mut g = c.benchmark_group("discrepancy");
    g.sample_size(10);
    g.bench_function("gamma1, Y = 1e4", |b| b.iter(|| discrepancy(black_box(&sys), 1, 10_000, &ctx).unwrap()));
    g.finish();
}

criterion_group!(benches, kernel, hensel, search, star_discrepancy);
criterion_main!(benches);
