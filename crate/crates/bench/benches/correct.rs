use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hsstab::stabilize::{stabilize, StabilizeOptions};
use hsstab_bench::{noisy_tuple, DIMS};

fn correct(c: &mut Criterion) {
    let opts = StabilizeOptions::default();
    for preset in ["chain:2,5:3,7", "hnn:2,3:3,2"] {
        let mut g = c.benchmark_group(format!("stabilize/{preset}"));
        g.sample_size(10);
        for n in DIMS {
            let (p, t) = noisy_tuple(preset, n, 1e-3, 7);
            g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
                b.iter(|| stabilize(&p, &t, &opts).unwrap())
            });
        }
        g.finish();
    }
}

criterion_group!(benches, correct);
criterion_main!(benches);
