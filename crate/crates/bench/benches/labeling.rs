use std::hint::black_box;

use cadlabel::labeler::{compute_pseudo_labels, gold_policy, LabelOptions};
use cadlabel::metrics::confusion;
use cadlabel::scenegen::{build_scene, sample_cloud, RoomSpec};
use cadlabel::cloud::voxel_subsample;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn label_room(c: &mut Criterion) {
    let mut group = c.benchmark_group("label_standard_room");
    group.sample_size(10);
    for density in [100.0, 500.0] {
        let spec = RoomSpec { density, ..RoomSpec::standard() };
        let scene = build_scene(&spec).unwrap();
        let cloud = sample_cloud(&scene, &spec).unwrap();
        let policy = gold_policy();
        group.bench_with_input(BenchmarkId::from_parameter(cloud.len()), &cloud, |b, cloud| {
            b.iter(|| compute_pseudo_labels(black_box(cloud), &scene, &policy, LabelOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn grid_cell(c: &mut Criterion) {
    let spec = RoomSpec::standard();
    let scene = build_scene(&spec).unwrap();
    let cloud = sample_cloud(&scene, &spec).unwrap();
    let policy = gold_policy();
    let mut group = c.benchmark_group("label_grid_cell");
    group.sample_size(10);
    for cell in [0.1, 0.25, 1.0] {
        group.bench_with_input(BenchmarkId::from_parameter(cell), &cell, |b, &cell| {
            b.iter(|| compute_pseudo_labels(&cloud, &scene, &policy, LabelOptions { grid_cell: cell }).unwrap())
        });
    }
    group.finish();
}

fn downstream(c: &mut Criterion) {
    let spec = RoomSpec::standard();
    let scene = build_scene(&spec).unwrap();
    let cloud = sample_cloud(&scene, &spec).unwrap();
    c.bench_function("voxel_subsample_1cm", |b| b.iter(|| voxel_subsample(black_box(&cloud), 0.01)));
    c.bench_function("confusion_18_classes", |b| {
        b.iter(|| confusion(black_box(&cloud.real_label), &cloud.real_label, 18).unwrap())
    });
}

criterion_group!(benches, label_room, grid_cell, downstream);
criterion_main!(benches);
