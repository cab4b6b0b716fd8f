use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use starios_bench::snr_sweep;
use starios_core::montecarlo::{estimate_outage_curve, McConfig};
use starios_core::LinkSide;

fn bench(c: &mut Criterion) {
    let trials = 100_000;
    let points = snr_sweep(30);
    let mut g = c.benchmark_group("mc curve");
    g.sample_size(10).throughput(Throughput::Elements(trials));
    g.bench_function("M=30, 8 points", |b| {
        b.iter(|| estimate_outage_curve(&points, LinkSide::Reflecting, &McConfig::new(trials, 1)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
