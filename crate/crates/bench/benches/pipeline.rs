use std::hint::black_box;

use contoursim::generate_contour;
use contoursim::raster::{morph_transform, rasterize_polygon, MorphKind};
use contoursim_bench::{disk, star};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn generation(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate_contour");
    for n in [256u32, 1024] {
        let gt = disk(n);
        let mut seed = 0u64;
        group.bench_with_input(BenchmarkId::from_parameter(n), &gt, |b, gt| {
            b.iter(|| {
                seed += 1;
                black_box(generate_contour(gt, seed).unwrap())
            })
        });
    }
    group.finish();
}

fn morphology(c: &mut Criterion) {
    let gt = disk(1024);
    let mut group = c.benchmark_group("morph_transform");
    for k in [5u32, 31, 61] {
        group.bench_with_input(BenchmarkId::new("dilate", k), &k, |b, &k| {
            b.iter(|| black_box(morph_transform(&gt, MorphKind::Dilate, k)))
        });
        group.bench_with_input(BenchmarkId::new("erode", k), &k, |b, &k| {
            b.iter(|| black_box(morph_transform(&gt, MorphKind::Erode, k)))
        });
    }
    group.finish();
}

fn rasterization(c: &mut Criterion) {
    let poly = star(40).closed().unwrap();
    c.bench_function("rasterize_polygon/1024", |b| {
        b.iter(|| black_box(rasterize_polygon(&poly, 1024, 1024)))
    });
}

criterion_group!(benches, generation, morphology, rasterization);
criterion_main!(benches);
