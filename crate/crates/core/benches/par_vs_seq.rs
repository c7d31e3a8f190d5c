//! Sequential vs parallel execution of the data-parallel kernels.

use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{BenchmarkId, Criterion, criterion_group, criterion_main};
use dispctl_core::dynamics::{duhamel, uniform_grid, weighted_gramian};
use dispctl_core::eigen::{DEFAULT_TOLERANCE, cluster_spectrum};
use dispctl_core::moment::{dual_moments, synthesize};
use dispctl_core::spectral::{ControlShape, FourierField};
use dispctl_core::symbols::DispersionSymbol;
use dispctl_core::{Complex64, Exec};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn target(n: usize) -> FourierField {
    FourierField::from_fn(n, |k| {
        if k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.5 / k as f64)
        }
    })
}

fn kernels(c: &mut Criterion) {
    let n = 32;
    let sym = DispersionSymbol::smith();
    let shape = ControlShape::build_with(PI, PI / 2.0, n, 8192, Exec::Sequential).unwrap();
    let analysis = cluster_spectrum(&sym, n, DEFAULT_TOLERANCE).unwrap();
    let h = synthesize(&FourierField::zeros(n), &target(n), &analysis, &shape, 1.0, 0.0).unwrap();
    let grid = uniform_grid(1.0, 64);

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (label, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("bump_transform", label), &exec, |b, &e| {
            b.iter(|| ControlShape::build_with(PI, PI / 2.0, n, 8192, e).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("duhamel", label), &exec, |b, &e| {
            b.iter(|| duhamel(&FourierField::zeros(n), &sym, &shape, &h, black_box(&grid), e).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("gramian", label), &exec, |b, &e| {
            b.iter(|| weighted_gramian(&sym, &shape, 0.0, 1.0, black_box(1.0), e).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("residual_quadrature", label), &exec, |b, &e| {
            b.iter(|| dual_moments(h.family(), black_box(&analysis.lambdas), e))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
