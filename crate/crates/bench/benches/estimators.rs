use std::hint::black_box;

use affunion::dimension::{box_count_series, dyadic_scales, neighborhood_volume};
use affunion::fixtures::SHARPNESS_FIXTURES;
use affunion::l2::pairwise_mass;
use affunion::{intersection_volume, AffinePlane, Ambient, DomainBox, SamplingDomain};
use criterion::{criterion_group, criterion_main, Criterion};

fn tube_overlap(c: &mut Criterion) {
    let amb = Ambient::new(3, 1).unwrap();
    let w = DomainBox::new(amb, 0.2).unwrap();
    let p = AffinePlane::from_code(vec![0.0, 0.0], vec![vec![0.1, -0.2]], amb).unwrap();
    let q = AffinePlane::from_code(vec![0.01, 0.0], vec![vec![-0.1, 0.1]], amb).unwrap();
    c.bench_function("intersection_volume slab 1e5", |b| {
        b.iter(|| intersection_volume(&p, &q, black_box(1.0 / 64.0), &w, SamplingDomain::Slab, 100_000, 1).unwrap())
    });
}

fn estimators(c: &mut Criterion) {
    let data = SHARPNESS_FIXTURES[0].build().unwrap();
    let scales = dyadic_scales(1, 10);
    c.bench_function("box_count_series sharpness-1-2-half", |b| {
        b.iter(|| box_count_series(black_box(&data.union), &scales).unwrap())
    });
    c.bench_function("neighborhood_volume delta 1/32", |b| {
        b.iter(|| neighborhood_volume(black_box(&data.union), 1.0 / 32.0, 1.0 / 128.0).unwrap())
    });
    let mut group = c.benchmark_group("l2");
    group.sample_size(10);
    group.bench_function("pairwise_mass delta 1/16", |b| {
        b.iter(|| pairwise_mass(&data.family, &data.clouds, 1.0 / 16.0, 1.0 / 64.0, 100_000, 1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, tube_overlap, estimators);
criterion_main!(benches);
