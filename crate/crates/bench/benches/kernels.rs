use std::f64::consts::FRAC_PI_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use kpspin_core::chaos::{chaotic_area, default_t_max_list, lyapunov_qr, phase_space_similarity};
use kpspin_core::floquet::{eigensystem, spin_operators, FloquetBuilder, SpinRepresentation};
use kpspin_core::quantum::{otoc_series, spectral_statistics};
use kpspin_core::{classical, ModelParams, PhasePoint};

fn classical_kernels(c: &mut Criterion) {
    let params = ModelParams::new(3, 6.0, FRAC_PI_2).unwrap();
    let x = PhasePoint::new(0.3, 0.2, 0.93).unwrap();
    c.bench_function("map step", |b| b.iter(|| classical::step(black_box(x), &params)));
    c.bench_function("tangent map", |b| b.iter(|| classical::tangent_map(black_box(x), &params)));
    c.bench_function("lyapunov 1e4 steps", |b| b.iter(|| lyapunov_qr(&params, x, 10_000, 1_000).unwrap()));

    let mut group = c.benchmark_group("phase space");
    group.sample_size(10);
    group.bench_function("area 2000 points", |b| {
        b.iter(|| chaotic_area(&params, 2_000, 6e-2, &default_t_max_list()).unwrap())
    });
    group.bench_function("similarity 1500 points", |b| {
        b.iter(|| phase_space_similarity(&params, 5e-4, 0.0, 1_500, 200).unwrap())
    });
    group.finish();
}

fn quantum_kernels(c: &mut Criterion) {
    let params = ModelParams::new(2, 6.0, FRAC_PI_2).unwrap();
    let mut group = c.benchmark_group("floquet");
    group.sample_size(10);
    for ns in [128u32, 256] {
        let builder = FloquetBuilder::new(SpinRepresentation::new(ns).unwrap()).unwrap();
        let op = builder.build(&params);
        let jz = spin_operators(op.rep).jz;
        group.bench_function(format!("build N_s={ns}"), |b| b.iter(|| builder.build(&params)));
        group.bench_function(format!("eigensystem N_s={ns}"), |b| b.iter(|| eigensystem(&op.matrix).unwrap()));
        group.bench_function(format!("spectral statistics N_s={ns}"), |b| {
            b.iter(|| spectral_statistics(&op, builder.basis()).unwrap())
        });
        group.bench_function(format!("otoc 10 kicks N_s={ns}"), |b| b.iter(|| otoc_series(&op, &jz, &jz, 10).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, classical_kernels, quantum_kernels);
criterion_main!(benches);
