//! Parallel-vs-sequential comparison of the data-parallel hot paths: chain
//! ensembles, log-domain scaling sweeps, and batch NMF epochs. "seq" runs
//! inside a one-thread rayon pool, "par" in a default-sized pool; outputs
//! are bit-identical either way.

use criterion::{criterion_group, criterion_main, Criterion};
use gibbs_ot::nmf::{TrainConfig, UpdateMode, WassersteinNmf};
use gibbs_ot::parallel::{map_indexed, with_threads};
use gibbs_ot::presets;
use gibbs_ot::sampler::{init_chain_with_stream, OtProblem};
use gibbs_ot::sinkhorn::{sinkhorn, SinkhornConfig};
use std::hint::black_box;

fn chain_ensemble(threads: usize) -> f64 {
    let (p, q, cost) = presets::random_instance(16, 16, 42).unwrap();
    let problem = OtProblem::new(&p, &q, &cost).unwrap();
    with_threads(threads, || {
        let finals = map_indexed(64, |chain| {
            let mut state = init_chain_with_stream(&problem, 7, chain as u64);
            for _ in 0..25 {
                state.sweep(&problem, 0.05, 0.05);
            }
            state.envelope_energy(&problem)
        });
        finals.iter().sum()
    })
}

fn sinkhorn_grid(threads: usize) -> f64 {
    let (p, q, cost) = presets::coulomb1d(128).unwrap();
    let config = SinkhornConfig::new(0.5 / 128.0, 50, 1e-300).unwrap();
    with_threads(threads, || sinkhorn(&p, &q, &cost, &config).unwrap().residual)
}

fn nmf_batch_epoch(threads: usize) -> f64 {
    let dataset = presets::two_blob_corpus(12, 8, 3).unwrap();
    let mut config = TrainConfig::new(2, 2.0, 1, 3).unwrap();
    config.update_mode = UpdateMode::Batch;
    config.exact_every = 0;
    with_threads(threads, || {
        let mut trainer = WassersteinNmf::new(dataset.clone(), config.clone()).unwrap();
        trainer.epoch().unwrap().objective_proxy
    })
}

fn bench_parallel_paths(c: &mut Criterion) {
    let mut group = c.benchmark_group("chain_ensemble_64x25");
    group.bench_function("seq", |b| b.iter(|| black_box(chain_ensemble(1))));
    group.bench_function("par", |b| b.iter(|| black_box(chain_ensemble(0))));
    group.finish();

    let mut group = c.benchmark_group("sinkhorn_128_grid_50it");
    group.bench_function("seq", |b| b.iter(|| black_box(sinkhorn_grid(1))));
    group.bench_function("par", |b| b.iter(|| black_box(sinkhorn_grid(0))));
    group.finish();

    let mut group = c.benchmark_group("nmf_batch_epoch_12x64");
    group.sample_size(20);
    group.bench_function("seq", |b| b.iter(|| black_box(nmf_batch_epoch(1))));
    group.bench_function("par", |b| b.iter(|| black_box(nmf_batch_epoch(0))));
    group.finish();
}

criterion_group!(benches, bench_parallel_paths);
criterion_main!(benches);
