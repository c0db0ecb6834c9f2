use criterion::{black_box, criterion_group, criterion_main, Criterion};
use oscprop_bench::{cubic, oscillator, sample_series};
use oscprop_core::{
    complex_gaussian_integral, harmonic_kernel, propagator_series, volterra_oracle, Complex64,
    Forcing, QuadraticCoefficients,
};

fn kernels(c: &mut Criterion) {
    let p = oscillator();
    let f = cubic().forcing();
    c.bench_function("harmonic_kernel/f=0", |b| b.iter(|| harmonic_kernel(black_box(&p), &Forcing::zero())));
    c.bench_function("harmonic_kernel/cubic", |b| b.iter(|| harmonic_kernel(black_box(&p), &f)));
    let q = QuadraticCoefficients::new(Complex64::new(-0.3, 1.2), Complex64::new(0.5, -1.0), Complex64::new(0.1, 0.2));
    c.bench_function("complex_gaussian_integral", |b| b.iter(|| complex_gaussian_integral(black_box(&q))));
}

fn series(c: &mut Criterion) {
    let (nu, p) = sample_series();
    let mut g = c.benchmark_group("series");
    g.sample_size(10);
    g.bench_function("propagator_series/1e-9", |b| {
        b.iter(|| propagator_series(black_box(&nu), &p, &Forcing::zero(), 1e-9, 30))
    });
    g.bench_function("volterra_oracle/grid=200", |b| {
        b.iter(|| volterra_oracle(black_box(&nu), &p, &Forcing::zero(), 200))
    });
    g.finish();
}

criterion_group!(benches, kernels, series);
criterion_main!(benches);
