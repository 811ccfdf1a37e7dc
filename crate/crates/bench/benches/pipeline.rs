use std::hint::black_box;

use blindwave::harness::{Scenario, SimulationModel};
use blindwave::{estimate, forward, FgnGenerator, MeyerBasis, PeriodicSignal};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_signal(n: usize) -> PeriodicSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    PeriodicSignal::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn fourier(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward");
    for n in [1 << 10, 1 << 13, 1 << 16] {
        let s = random_signal(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| {
            b.iter(|| forward(black_box(s)))
        });
    }
    group.finish();
}

fn wavelets(c: &mut Criterion) {
    let n = 1 << 13;
    let basis = MeyerBasis::new(n, 3).unwrap();
    let series = forward(&random_signal(n));
    let top = basis.max_level();
    c.bench_function("analyze_8192", |b| b.iter(|| basis.analyze(black_box(&series), top).unwrap()));
    let coeffs = basis.analyze(&series, top).unwrap();
    c.bench_function("synthesize_8192", |b| b.iter(|| basis.synthesize(black_box(&coeffs)).unwrap()));
}

fn fgn(c: &mut Criterion) {
    let mut group = c.benchmark_group("fgn_sample");
    for n in [1 << 10, 1 << 13, 1 << 16] {
        let gen = FgnGenerator::new(0.75, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &gen, |b, gen| {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            b.iter(|| gen.sample(&mut rng))
        });
    }
    group.finish();
}

fn estimator(c: &mut Criterion) {
    let sc = Scenario::default_scenario();
    let model = SimulationModel::new(&sc).unwrap();
    let config = sc.estimator.config();
    let level = (-6f64).exp2();
    let obs = model.observations(level, level, 7).unwrap();
    c.bench_function("estimate_default_scenario", |b| {
        b.iter(|| estimate(black_box(&obs), &config).unwrap())
    });
    c.bench_function("simulate_default_scenario", |b| {
        let mut seed = 0;
        b.iter(|| {
            seed += 1;
            model.observations(level, level, seed).unwrap()
        })
    });
}

criterion_group!(benches, fourier, wavelets, fgn, estimator);
criterion_main!(benches);
