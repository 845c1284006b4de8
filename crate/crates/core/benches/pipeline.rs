use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use phoneloc::aggregation::{aggregate_video, AggregationConfig};
use phoneloc::classifier::{gradient, gradient_seq, Example, HeadWeights, DEFAULT_LAMBDA};
use phoneloc::domain::{AggregationMode, BehaviorClass, ClipLabels};
use phoneloc::par;
use phoneloc::rng::SimRng;
use phoneloc::synthdata::{simulate_video, SimConfig, SimVideo};

fn batch(n: usize, dim: usize) -> Vec<Example> {
    let mut rng = SimRng::new(5);
    (0..n)
        .map(|_| Example {
            features: (0..dim).map(|_| rng.normal()).collect(),
            labels: ClipLabels {
                class: BehaviorClass(rng.below(3) as usize),
                start_inclusion: rng.bernoulli(0.3),
                end_inclusion: rng.bernoulli(0.3),
            },
        })
        .collect()
}

fn bench_gradient(c: &mut Criterion) {
    let mut group = c.benchmark_group("gradient");
    for &(n, dim) in &[(8usize, 16usize), (256, 256), (2048, 512)] {
        let w = HeadWeights::init(3, dim, 1);
        let data = batch(n, dim);
        let id = format!("{n}x{dim}");
        group.bench_with_input(BenchmarkId::new("parallel", &id), &data, |b, d| {
            b.iter(|| gradient(black_box(&w), d, DEFAULT_LAMBDA).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", &id), &data, |b, d| {
            b.iter(|| gradient_seq(black_box(&w), d, DEFAULT_LAMBDA).unwrap())
        });
    }
    group.finish();
}

fn bench_simulate(c: &mut Criterion) {
    let cfg = SimConfig {
        videos: 16,
        ..SimConfig::default()
    };
    let mut group = c.benchmark_group("simulate_16x600s");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| par::map_range(cfg.videos, |i| simulate_video(&cfg, i).unwrap()))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            (0..cfg.videos)
                .map(|i| simulate_video(&cfg, i).unwrap())
                .collect::<Vec<_>>()
        })
    });
    group.finish();
}

fn bench_aggregate(c: &mut Criterion) {
    let cfg = SimConfig {
        videos: 32,
        ..SimConfig::default()
    };
    let videos: Vec<SimVideo> = (0..cfg.videos)
        .map(|i| simulate_video(&cfg, i).unwrap())
        .collect();
    let agg = AggregationConfig::default();
    let run = |v: &SimVideo| {
        aggregate_video(&v.windows, &v.scores, AggregationMode::Refined, &agg).unwrap()
    };
    let mut group = c.benchmark_group("aggregate_refined_32_videos");
    group.bench_function("parallel", |b| b.iter(|| par::map(black_box(&videos), run)));
    group.bench_function("sequential", |b| {
        b.iter(|| par::map_seq(black_box(&videos), run))
    });
    group.finish();
}

criterion_group!(benches, bench_gradient, bench_simulate, bench_aggregate);
criterion_main!(benches);
