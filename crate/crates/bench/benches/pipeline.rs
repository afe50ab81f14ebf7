use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use mmwave_sir::coverage::TruncatedLaplace;
use mmwave_sir::fit::{fit_values, ks_statistic};
use mmwave_sir::gains::sample_gain;
use mmwave_sir::netsim::{generate_snapshot, snapshot_sir};
use mmwave_sir::rng::{par_map_streams, stream};
use mmwave_sir::{Family, FittedDist, GainKind, GainSource, LinkState, SystemParams};
use mmwave_sir_bench::{coverage_model, fitted_source, published_laws};

fn gains(c: &mut Criterion) {
    let mut group = c.benchmark_group("gain_sample");
    for (t, r) in [(64, 16), (256, 64)] {
        let params = SystemParams::with_antennas(t, r);
        for kind in [GainKind::Aligned, GainKind::Misaligned] {
            let mut rng = stream(1, 0);
            group.bench_function(format!("{}_{t}x{r}", kind.as_str()), |b| {
                b.iter(|| sample_gain(kind, &mut rng, black_box(&params)).unwrap())
            });
        }
    }
    group.finish();
}

fn fitting(c: &mut Criterion) {
    let params = SystemParams::with_antennas(256, 64);
    let samples = par_map_streams(2, 10_000, |rng, _| {
        sample_gain(GainKind::Misaligned, rng, &params).unwrap()
    });
    let mut group = c.benchmark_group("fit_10k");
    group.sample_size(10);
    for family in [Family::LogLogistic, Family::Burr, Family::Nakagami] {
        group.bench_function(family.as_str(), |b| {
            b.iter(|| fit_values(black_box(&samples), family).unwrap())
        });
    }
    let law = fit_values(&samples, Family::LogLogistic).unwrap();
    let dist = FittedDist::capped(law, 16384.0).unwrap();
    group.bench_function("ks_statistic", |b| {
        b.iter(|| ks_statistic(black_box(&samples), &dist).unwrap())
    });
    group.finish();
}

fn coverage(c: &mut Criterion) {
    let mut group = c.benchmark_group("coverage");
    group.sample_size(10);
    let (gx, _) = published_laws(256, 64);
    group.bench_function("laplace_table_build", |b| {
        b.iter(|| TruncatedLaplace::new(black_box(&gx)).unwrap())
    });
    let model = coverage_model(256, 64);
    group.bench_function("laplace_functional", |b| {
        b.iter(|| {
            model
                .laplace_interference(black_box(1.0), 80.0, LinkState::Los, LinkState::Nlos)
                .unwrap()
        })
    });
    group.bench_function("coverage_point_0dB", |b| {
        b.iter(|| model.coverage(black_box(1.0)).unwrap())
    });
    group.finish();
}

fn network(c: &mut Criterion) {
    let params = SystemParams::default();
    let mut group = c.benchmark_group("network");
    let mut rng = stream(3, 0);
    group.bench_function("snapshot_2km", |b| {
        b.iter(|| generate_snapshot(&mut rng, &params, 2000.0).unwrap())
    });
    let source = fitted_source(256, 64);
    let mut rng = stream(4, 0);
    group.bench_function("sir_fitted_2km", |b| {
        b.iter_batched(
            || generate_snapshot(&mut stream(5, 0), &params, 2000.0).unwrap(),
            |snap| snapshot_sir(&snap, &source, &mut rng, &params).unwrap(),
            BatchSize::SmallInput,
        )
    });
    let full = GainSource::FullChannel;
    let small = SystemParams::with_antennas(16, 4);
    let mut rng = stream(6, 0);
    group.sample_size(10);
    group.bench_function("sir_full_channel_2km", |b| {
        b.iter_batched(
            || generate_snapshot(&mut stream(7, 0), &small, 2000.0).unwrap(),
            |snap| snapshot_sir(&snap, &full, &mut rng, &small).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, gains, fitting, coverage, network);
criterion_main!(benches);
