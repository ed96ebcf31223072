use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hsstab::linalg::{branch_power, matmul, polar_unitary, unitary_eig};
use hsstab::Complex64;
use hsstab_bench::{random_unitary, DIMS};

fn kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernels");
    g.sample_size(10);
    for n in DIMS {
        let u = random_unitary(n, 1);
        let v = random_unitary(n, 2);
        let near = (&u * Complex64::new(0.999, 0.0)) + (&v * Complex64::new(0.001, 0.0));
        g.bench_with_input(BenchmarkId::new("matmul", n), &n, |b, _| {
            b.iter(|| matmul(&u, &v))
        });
        g.bench_with_input(BenchmarkId::new("polar", n), &n, |b, _| {
            b.iter(|| polar_unitary(&near))
        });
        g.bench_with_input(BenchmarkId::new("unitary_eig", n), &n, |b, _| {
            b.iter(|| unitary_eig(&u, 1e-10).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("branch_power", n), &n, |b, _| {
            b.iter(|| branch_power(&u, 0.5).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
