use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use walker_forge::dataset::DesignRow;
use walker_forge::fea::{simulate_with, SimulationSettings};
use walker_forge::model::{DesignVector, FeasibilityLimits};
use walker_forge::pipeline::simulate_rows;
use walker_forge::sampling::sobol::sobol_points;
use walker_forge::sampling::{generate_batch, ParameterRanges};
use walker_forge::surrogate::{split, train, BoostingConfig, ForestConfig, SurrogateConfig};

fn simulate(c: &mut Criterion) {
    let settings = SimulationSettings::default();
    let d = DesignVector::original();
    c.bench_function("simulate_original", |b| b.iter(|| simulate_with(black_box(&d), &settings).unwrap()));
}

fn sobol(c: &mut Criterion) {
    c.bench_function("sobol_4096x16", |b| b.iter(|| sobol_points(16, black_box(4096), 0).unwrap()));
    let ranges = ParameterRanges::default();
    let limits = FeasibilityLimits::default();
    c.bench_function("generate_batch_4096", |b| {
        b.iter(|| generate_batch(black_box(4096), &ranges, &limits, 0).unwrap())
    });
}

fn predict(c: &mut Criterion) {
    let ranges = ParameterRanges::default();
    let batch = generate_batch(1500, &ranges, &FeasibilityLimits::default(), 0).unwrap();
    let designs: Vec<DesignRow> = batch
        .designs
        .iter()
        .enumerate()
        .map(|(i, s)| DesignRow {
            design_id: i as u64,
            sobol_index: s.sobol_index,
            design: s.design,
        })
        .collect();
    let rows = simulate_rows(&designs, &SimulationSettings::default(), 400.0);
    let cfg = SurrogateConfig {
        folds: 3,
        forest: ForestConfig {
            n_trees: 50,
            ..ForestConfig::default()
        },
        boosting: BoostingConfig {
            n_rounds: 100,
            ..BoostingConfig::default()
        },
        ..SurrogateConfig::default()
    };
    let (tr, te) = split(&rows, cfg.test_fraction, cfg.seed).unwrap();
    let model = train(&tr, &ranges, &cfg).unwrap();
    let q = te[0].design;
    c.bench_function("predict_one", |b| b.iter(|| model.predict_values(black_box(&q)).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = simulate, sobol, predict
}
criterion_main!(benches);
