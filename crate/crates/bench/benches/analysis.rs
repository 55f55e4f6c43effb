use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use skillfix_bench::{analyze, synthetic_counterstrategy, synthetic_spec};

fn analysis(c: &mut Criterion) {
    let spec = synthetic_spec();
    let mut group = c.benchmark_group("analysis");
    for n in [1000, 2000, 4000] {
        let cs = synthetic_counterstrategy(n, 42);
        group.bench_with_input(BenchmarkId::from_parameter(n), &cs, |b, cs| b.iter(|| analyze(cs, &spec)));
    }
    group.finish();
}

criterion_group!(benches, analysis);
criterion_main!(benches);
