//! Data-parallel against sequential execution on the main workloads.
//! Without the `parallel` feature both modes run the same serial loop.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spinchaos::chaos::{chaos_curve, pair_functional, ChaosModel, GraphSource};
use spinchaos::disorder::{standard_gaussians, DisorderModel, PerturbationKind};
use spinchaos::gibbs::{exact_correlations_with, Beta, SpinSystem};
use spinchaos::hermite::coefficient_table;
use spinchaos::randgraph::{growth_stats, DilutedSpec};
use spinchaos::{fixtures, Execution, StreamSeed};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn enumeration(c: &mut Criterion) {
    let g = fixtures::torus(4, 4).unwrap();
    let j = standard_gaussians(g.n_edges(), &mut StreamSeed::new(1).stream("disorder", 0));
    let sys = SpinSystem::new(&g, j, Beta::Finite(1.0)).unwrap();
    let mut group = c.benchmark_group("exact-enumeration-torus-4x4");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exact_correlations_with(&sys, exec).unwrap())
        });
    }
    group.finish();
}

fn curve(c: &mut Criterion) {
    let model = ChaosModel::gaussian(
        GraphSource::Fixed(fixtures::ring(12).unwrap()),
        Beta::Finite(1.0),
        PerturbationKind::Continuous,
    );
    let mut group = c.benchmark_group("chaos-curve-ring-12");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| chaos_curve(&model, &[0.0, 0.5, 1.0, 2.0], 64, StreamSeed::new(2), exec).unwrap())
        });
    }
    group.finish();
}

fn coefficients(c: &mut Criterion) {
    let g = fixtures::path(5).unwrap();
    let disorder = DisorderModel::gaussian(2);
    let phi = pair_functional(&g, &disorder, 1.0, 0, 4);
    let mut group = c.benchmark_group("coefficient-table-path-5");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| coefficient_table(&phi, &[10; 4], 6, exec).unwrap())
        });
    }
    group.finish();
}

fn exploration(c: &mut Criterion) {
    let spec = DilutedSpec::new(2000, [(2, 0.6), (3, 0.2)].into_iter().collect()).unwrap();
    let mut group = c.benchmark_group("growth-stats-n-2000");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| growth_stats(&spec, 4, 200, StreamSeed::new(3), exec, false).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, enumeration, curve, coefficients, exploration);
criterion_main!(benches);
