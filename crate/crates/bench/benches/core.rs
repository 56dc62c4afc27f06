use criterion::{criterion_group, criterion_main, Criterion};
use nonlocal_core::flow::{fredholm_index, weighted_front_path, FlowOptions};
use nonlocal_core::kernel::{BaseKernel, KernelModel};
use nonlocal_core::nonlinearity::Nonlinearity;
use nonlocal_core::oracle::{assemble_weighted, numerical_index, InhomogeneousOperator};
use nonlocal_core::symbol::{count_roots, roots_in_rectangle, CharacteristicFunction, Rectangle};
use nonlocal_core::wavetrain::{continue_branch, ReducedData, WaveProblem};
use nonlocal_core::RMatrix;
use std::hint::black_box;

fn s(a: f64) -> RMatrix {
    RMatrix::from_element(1, 1, a)
}

fn exp1() -> KernelModel {
    KernelModel::scalar(BaseKernel::TwoSidedExponential { rate: 1.0 }, 1.0).unwrap()
}

fn symbols(c: &mut Criterion) {
    let cf = CharacteristicFunction::steady_state(s(2.0), exp1()).unwrap();
    let rect = Rectangle::new(-0.5, 0.5, -2.0, 2.0).unwrap();
    c.bench_function("count_roots/exp2", |b| b.iter(|| count_roots(black_box(&cf), &rect).unwrap()));
    let kaw = CharacteristicFunction::kawahara(1.0, 2.0).unwrap();
    let rect = Rectangle::new(-2.0, 2.0, -2.0, 2.0).unwrap();
    c.bench_function("roots_in_rectangle/kawahara", |b| {
        b.iter(|| roots_in_rectangle(black_box(&kaw), &rect, 1e-12).unwrap())
    });
}

fn flow(c: &mut Criterion) {
    let path = weighted_front_path(|a| CharacteristicFunction::steady_state(a, exp1()), s(0.5), s(2.0), 0.3, 0.6).unwrap();
    c.bench_function("fredholm_index/weighted_front", |b| {
        b.iter(|| fredholm_index(black_box(&path), &FlowOptions::default()).unwrap())
    });
}

fn oracle(c: &mut Criterion) {
    let op = InhomogeneousOperator::steady_state(exp1(), |x| s(0.5 + 0.75 * (1.0 + x.tanh())), s(0.5), s(2.0)).unwrap();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("numerical_index/L30_N450", |b| {
        b.iter(|| numerical_index(&assemble_weighted(black_box(&op), 30.0, 450, 0.3).unwrap(), 1e3).unwrap())
    });
    g.finish();
}

fn wavetrain(c: &mut Criterion) {
    let p = WaveProblem::new(s(2.0), exp1(), Nonlinearity::quadratic(), 16).unwrap();
    let rd = ReducedData::compute(&p, (0.5, 1.5)).unwrap();
    let mut g = c.benchmark_group("wavetrain");
    g.sample_size(10);
    g.bench_function("continue_branch/exp2", |b| b.iter(|| continue_branch(black_box(&p), &rd, 0.1, 5)));
    g.finish();
}

criterion_group!(benches, symbols, flow, oracle, wavetrain);
criterion_main!(benches);
