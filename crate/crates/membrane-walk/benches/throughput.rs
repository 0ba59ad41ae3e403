//! Throughput of the data-parallel cores against the sequential reference:
//! replicate fan-out of the walk engine and the convolution grid builder.
//!
//! Build with default features to bench rayon against the always-available
//! sequential path; `--no-default-features` benches the fallback only.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use membrane_walk::exec::{map_replicates, map_replicates_seq};
use membrane_walk::lattice::{LatticePoint, Membrane};
use membrane_walk::law::JumpLaw;
use membrane_walk::oracle::build_grid;
use membrane_walk::walker::{run, RunKey, WalkConfig};
use std::hint::black_box;

fn walk_batch_config() -> WalkConfig {
    let origin = LatticePoint::origin(2);
    let membrane = Membrane::new(vec![(
        origin,
        JumpLaw::categorical(vec![
            (LatticePoint::new(&[3, 0]).unwrap(), 0.25),
            (LatticePoint::new(&[-3, 0]).unwrap(), 0.25),
            (LatticePoint::new(&[0, 3]).unwrap(), 0.25),
            (LatticePoint::new(&[0, -3]).unwrap(), 0.25),
        ])
        .unwrap(),
    )])
    .unwrap();
    WalkConfig::new(
        origin,
        JumpLaw::lazy_simple_neighbor(2, 0.5).unwrap(),
        membrane,
        20_000,
    )
}

fn replicate_total(config: &WalkConfig, parallel: bool, count: u64) -> u64 {
    let body = |rep: u64| {
        let key = RunKey {
            seed: 7,
            experiment: 0,
            phase: 0,
            replicate: rep,
        };
        run(config, key).expect("valid config").occupation.total
    };
    let totals = if parallel {
        map_replicates(count, body)
    } else {
        map_replicates_seq(count, body)
    };
    totals.into_iter().sum()
}

fn bench_walker_batch(c: &mut Criterion) {
    let config = walk_batch_config();
    let mut group = c.benchmark_group("walker_batch");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(replicate_total(&config, true, 64)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(replicate_total(&config, false, 64)))
    });
    // both paths must agree exactly
    assert_eq!(
        replicate_total(&config, true, 64),
        replicate_total(&config, false, 64)
    );
    group.finish();
}

fn bench_grid_convolution(c: &mut Criterion) {
    let law = JumpLaw::lazy_simple_neighbor(2, 0.5).unwrap();
    let mut group = c.benchmark_group("grid_convolution");
    group.sample_size(10);
    group.bench_function("window_200_steps_200", |b| {
        b.iter_batched(
            || law.clone(),
            |law| black_box(build_grid(&law, 200, Some(200), false).expect("fits the guard")),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, bench_walker_batch, bench_grid_convolution);
criterion_main!(benches);
