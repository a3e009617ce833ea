use criterion::{criterion_group, criterion_main, Criterion};
use robinspec_core::corrections::{build_operator_series, run_iteration};
use robinspec_core::geometry::{arc_length_reparam, localize_max, ParametricCurve};
use robinspec_core::model1d::{fd_eigs_h0h, Model1DConfig};
use robinspec_core::solvers::{assemble_collar, boundary_operator_eigs};

fn ellipse_profile() -> robinspec_core::geometry::CurvatureProfile {
    let mut p = arc_length_reparam(&ParametricCurve::Ellipse { a: 2.0, b: 1.0 }, 1024).unwrap();
    localize_max(&mut p, 1e-9).unwrap();
    p
}

fn bench_corrections(c: &mut Criterion) {
    let profile = ellipse_profile();
    let jet = profile.kappa_jet_at_max(13);
    let omega = (-jet[2] / 2.0).sqrt();
    c.bench_function("correction_recursion_order_5", |b| {
        b.iter(|| {
            let ops = build_operator_series(&jet, 12).unwrap();
            std::hint::black_box(run_iteration(&ops, 1, 5, omega).unwrap());
        })
    });
}

fn bench_model1d(c: &mut Criterion) {
    let cfg = Model1DConfig::new(8.0, 2000);
    c.bench_function("model1d_fd_2000", |b| {
        b.iter(|| std::hint::black_box(fd_eigs_h0h(&cfg, 2)))
    });
}

fn bench_collar_assembly(c: &mut Criterion) {
    let profile = ellipse_profile();
    c.bench_function("collar_assembly_128x32", |b| {
        b.iter(|| std::hint::black_box(assemble_collar(&profile, 0.01, 128, 32, 0.4).unwrap()))
    });
}

fn bench_boundary_operator(c: &mut Criterion) {
    let profile = ellipse_profile();
    c.bench_function("boundary_operator_64_modes", |b| {
        b.iter(|| std::hint::black_box(boundary_operator_eigs(&profile, -50.0, 4, 64).unwrap()))
    });
}

criterion_group!(
    kernels,
    bench_corrections,
    bench_model1d,
    bench_collar_assembly,
    bench_boundary_operator
);
criterion_main!(kernels);
