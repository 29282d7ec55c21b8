use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use phasebound_bench::{constraint_sets, lumpy_field};
use phasebound_core::extremals::{extremal_weight_gabor, extremal_weight_wavelet};
use phasebound_core::gabor::{assemble_operator, assemble_radial, operator_norm, radial_eigenvalues, AssemblyOptions};
use phasebound_core::wavelet::bergman_diagonal;
use phasebound_core::{bound, lambda_root, schwarz_symmetrize, solve_kkt_oracle, ConstraintSet};

fn bounds(c: &mut Criterion) {
    let mut group = c.benchmark_group("bound");
    for (name, set) in constraint_sets() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &set, |b, set| b.iter(|| bound(black_box(set))));
    }
    group.finish();
    let set = ConstraintSet::gabor(2.0, 1.0, 1.0, 2).expect("valid");
    c.bench_function("lambda_root/d2", |b| b.iter(|| lambda_root(black_box(&set))));
}

fn radial(c: &mut Criterion) {
    let set = ConstraintSet::gabor(2.0, 1.0, 1.0, 1).expect("valid");
    let w = extremal_weight_gabor(&set, (0.0, 0.0)).expect("extremal");
    let mut group = c.benchmark_group("radial");
    for k in [16, 48, 128] {
        group.bench_with_input(BenchmarkId::new("eigenvalues", k), &k, |b, &k| b.iter(|| radial_eigenvalues(&w, k)));
        group.bench_with_input(BenchmarkId::new("assemble", k), &k, |b, &k| b.iter(|| assemble_radial(&w, k)));
    }
    group.finish();

    let set = ConstraintSet::wavelet(2.0, 1.0, 2.0, 1.0).expect("valid");
    let w = extremal_weight_wavelet(&set, (0.0, 1.0)).expect("extremal");
    c.bench_function("bergman_diagonal/64", |b| b.iter(|| bergman_diagonal(&w, 1.0, 64)));
}

fn fields(c: &mut Criterion) {
    let mut group = c.benchmark_group("field");
    group.sample_size(10);
    for n in [64, 128] {
        let field = lumpy_field(n);
        group.bench_with_input(BenchmarkId::new("assemble_k48", n), &field, |b, f| {
            b.iter(|| assemble_operator(f, &AssemblyOptions::with_basis(48)))
        });
        group.bench_with_input(BenchmarkId::new("symmetrize", n), &field, |b, f| b.iter(|| schwarz_symmetrize(f)));
    }
    let m = assemble_operator(&lumpy_field(64), &AssemblyOptions::with_basis(48)).expect("assembly");
    group.bench_function("eigen_k48", |b| b.iter(|| operator_norm(black_box(&m))));
    group.finish();
}

fn varprob(c: &mut Criterion) {
    let set = ConstraintSet::gabor(2.0, 1.0, 1.0, 1).expect("valid");
    c.bench_function("kkt_oracle/400", |b| b.iter(|| solve_kkt_oracle(black_box(&set), 400)));
}

criterion_group!(benches, bounds, radial, fields, varprob);
criterion_main!(benches);
