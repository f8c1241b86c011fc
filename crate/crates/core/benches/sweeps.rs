use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pdcsim::dispersion::{CrystalSpec, SellmeierModel};
use pdcsim::fock::Basis;
use pdcsim::jsa::{build_jsa_with, filter_sweep, GridConfig, JsaOptions, PumpSpec};
use pdcsim::model::{phase_sweep, theta_grid, ModelParams};
use pdcsim::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bench_build_jsa(c: &mut Criterion) {
    let (crystal, pump, model) = (
        CrystalSpec::default(),
        PumpSpec::default(),
        SellmeierModel::bbo(),
    );
    let mut group = c.benchmark_group("build_jsa");
    group.sample_size(10);
    for n in [256, 512] {
        let grid = GridConfig {
            n,
            ..Default::default()
        }
        .resolve(&crystal, &pump, &model)
        .unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &grid, |b, g| {
                b.iter(|| {
                    build_jsa_with(&crystal, &pump, g, &model, &JsaOptions::default(), exec)
                        .unwrap()
                })
            });
        }
    }
    group.finish();
}

fn bench_filter_sweep(c: &mut Criterion) {
    let (crystal, pump, model) = (
        CrystalSpec::default(),
        PumpSpec::default(),
        SellmeierModel::bbo(),
    );
    let grid = GridConfig::default()
        .resolve(&crystal, &pump, &model)
        .unwrap();
    let bandwidths: Vec<f64> = (1..=16).map(|i| i as f64).collect();
    let mut group = c.benchmark_group("filter_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                filter_sweep(
                    &crystal,
                    &pump,
                    &grid,
                    &model,
                    &JsaOptions::default(),
                    780.0,
                    &bandwidths,
                    exec,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_phase_sweep(c: &mut Criterion) {
    let params = ModelParams {
        order: 2,
        ..ModelParams::from_squares(0.91, 0.5).unwrap()
    };
    let thetas = theta_grid(64);
    let mut group = c.benchmark_group("phase_sweep_order2");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| phase_sweep(&params, &thetas, &Basis::ALL, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_build_jsa,
    bench_filter_sweep,
    bench_phase_sweep
);
criterion_main!(benches);
