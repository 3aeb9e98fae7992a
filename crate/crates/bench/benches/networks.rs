//! Hot paths: network assembly, factorized solves, and the two walk
//! flavors.  Sizes mirror the acceptance suite so a regression here
//! predicts a slow acceptance run.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use sdl_core::forms::{assemble, FormMatrices};
use sdl_core::mesh::{PolarMesh, Topology, TopologyMode};
use sdl_core::potential::{origin_capacity, resolvent, verify_two_point};
use sdl_core::stochastic::{
    bessel_hit_estimate, split_hit_probability_mc, BesselConfig,
};
use sdl_core::weights::{RadialProfile, WeightFamily, WeightSpec};
use std::hint::black_box;

fn reference_network(mode: TopologyMode) -> FormMatrices {
    let w = WeightSpec::new(
        WeightFamily::TwoQuadrant,
        RadialProfile::power(1.0).unwrap(),
        1.0,
    )
    .unwrap();
    let mesh = PolarMesh::build_graded(32, 32, 1e-3, 2.0, 25).unwrap();
    let topo = Topology::build(&mesh, &w, mode).unwrap();
    assemble(&mesh, &topo, &w).unwrap()
}

fn bench_assembly(c: &mut Criterion) {
    let w = WeightSpec::new(
        WeightFamily::TwoQuadrant,
        RadialProfile::power(1.0).unwrap(),
        1.0,
    )
    .unwrap();
    let mesh = PolarMesh::build_graded(32, 32, 1e-3, 2.0, 25).unwrap();
    let topo = Topology::build(&mesh, &w, TopologyMode::Glued).unwrap();
    c.bench_function("assemble_32x32_glued", |b| {
        b.iter(|| assemble(black_box(&mesh), black_box(&topo), black_box(&w)).unwrap())
    });
}

fn bench_solves(c: &mut Criterion) {
    let glued = reference_network(TopologyMode::Glued);
    let split = reference_network(TopologyMode::Split);
    let f: Vec<f64> = (0..glued.n_mesh()).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();

    c.bench_function("resolvent_32x32_glued", |b| {
        b.iter(|| resolvent(black_box(&glued), 1.0, black_box(&f)).unwrap())
    });
    c.bench_function("origin_capacity_32x32_glued", |b| {
        b.iter(|| origin_capacity(black_box(&glued), 1.0).unwrap())
    });
    c.bench_function("two_point_verification_32x32", |b| {
        b.iter(|| verify_two_point(black_box(&split), 1.0, black_box(&f)).unwrap())
    });
}

fn bench_walks(c: &mut Criterion) {
    let split = reference_network(TopologyMode::Split);
    let start = split.mesh.node_index(16, 4);

    c.bench_function("jump_chain_1000_paths", |b| {
        let mut seed = 0u64;
        b.iter_batched(
            || {
                seed += 1;
                seed
            },
            |s| split_hit_probability_mc(black_box(&split), start, 1_000, s, 50_000_000).unwrap(),
            BatchSize::SmallInput,
        )
    });

    c.bench_function("bessel_200_paths", |b| {
        let mut seed = 0u64;
        b.iter_batched(
            || {
                seed += 1;
                BesselConfig {
                    delta: 1.0,
                    r0: 0.5,
                    inner: 0.01,
                    outer: 1.0,
                    dt: 1e-4,
                    paths: 200,
                    seed,
                    max_steps: 500_000_000,
                }
            },
            |cfg| bessel_hit_estimate(black_box(&cfg)).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_assembly, bench_solves, bench_walks);
criterion_main!(benches);
