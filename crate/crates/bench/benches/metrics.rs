use criterion::{black_box, criterion_group, criterion_main, Criterion};
use summalign_bench::random_intervals;
use summalign_core::evaluation::{frame_metrics, shot_level_metrics, ShotMatchConfig};
use summalign_core::summarization::nms;
use summalign_core::Shot;

fn bench_metrics(c: &mut Criterion) {
    let pred = random_intervals(20_000, 300, 60, 2.0, 1);
    let truth = random_intervals(20_000, 300, 60, 2.0, 2);
    c.bench_function("frame_metrics_300", |b| {
        b.iter(|| frame_metrics(black_box(&pred), black_box(&truth)).unwrap())
    });
    let shots: Vec<Shot> = pred.iter().map(|&i| Shot::new(i, None).unwrap()).collect();
    let cfg = ShotMatchConfig::new(0.5, 10.0).unwrap();
    c.bench_function("shot_level_300", |b| {
        b.iter(|| shot_level_metrics(black_box(&shots), black_box(&truth), &cfg).unwrap())
    });
}

fn bench_nms(c: &mut Criterion) {
    let proposals: Vec<Shot> = random_intervals(20_000, 5000, 60, 2.0, 3)
        .into_iter()
        .enumerate()
        .map(|(k, i)| Shot::scored(i, (k % 97) as f64 / 97.0).unwrap())
        .collect();
    c.bench_function("nms_5000", |b| b.iter(|| nms(black_box(&proposals)).unwrap()));
}

criterion_group!(benches, bench_metrics, bench_nms);
criterion_main!(benches);
