//! Hot-path benchmarks: dense geometric products by algebra dimension,
//! order-2 jet evaluation of frame bases, and the two connection routes.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cliffym::fixtures::{build_frame, make_rng, random_multivector, sample_points, FrameRecipe};
use cliffym::{
    connection_averaged_at, connection_projection_at, BaseSpace, Connection, FrameKind, Signature,
    YangMillsField,
};

fn geometric_product(c: &mut Criterion) {
    let mut group = c.benchmark_group("geometric_product");
    for n in [2u8, 4, 6, 8] {
        let sig = Signature::new(n, 0).unwrap();
        let mut rng = make_rng(5);
        let u = random_multivector::<f64>(sig, 1.0, &mut rng);
        let v = random_multivector::<f64>(sig, 1.0, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| std::hint::black_box(&u) * std::hint::black_box(&v))
        });
    }
    group.finish();
}

fn frame_basis_jets(c: &mut Criterion) {
    let mut group = c.benchmark_group("extended_basis_jets");
    for n in [2u8, 3, 4] {
        let sig = Signature::new(n, 0).unwrap();
        let base = BaseSpace::new(n, 0).unwrap();
        let recipe = FrameRecipe::Gauge {
            degree: 2,
            magnitude: 0.3,
        };
        let (frame, _) =
            build_frame::<f64>(recipe, sig, base, FrameKind::ScalarIndex, &mut make_rng(6))
                .unwrap();
        let x = sample_points::<f64>(base, 1, &mut make_rng(7)).remove(0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| frame.extended_basis(std::hint::black_box(&x)).unwrap())
        });
    }
    group.finish();
}

fn connection_routes(c: &mut Criterion) {
    let mut group = c.benchmark_group("connection");
    for n in [3u8, 4] {
        let sig = Signature::new(n, 0).unwrap();
        let base = BaseSpace::new(n, 0).unwrap();
        let recipe = FrameRecipe::Gauge {
            degree: 2,
            magnitude: 0.3,
        };
        let (frame, _) =
            build_frame::<f64>(recipe, sig, base, FrameKind::ScalarIndex, &mut make_rng(8))
                .unwrap();
        let x = sample_points::<f64>(base, 1, &mut make_rng(9)).remove(0);
        group.bench_with_input(BenchmarkId::new("averaging", n), &n, |b, _| {
            b.iter(|| connection_averaged_at(&frame, std::hint::black_box(&x)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("eigenprojection", n), &n, |b, _| {
            b.iter(|| connection_projection_at(&frame, std::hint::black_box(&x)).unwrap())
        });
    }
    group.finish();
}

fn yangmills_residuals(c: &mut Criterion) {
    let mut group = c.benchmark_group("yangmills_residuals");
    for n in [2u8, 3] {
        let sig = Signature::new(n, 0).unwrap();
        let base = BaseSpace::new(n, 0).unwrap();
        let recipe = FrameRecipe::Gauge {
            degree: 2,
            magnitude: 0.3,
        };
        let (frame, _) =
            build_frame::<f64>(recipe, sig, base, FrameKind::Vector, &mut make_rng(10)).unwrap();
        let ym = YangMillsField::sigma_family(&Connection::new(frame), 1.0).unwrap();
        let x = sample_points::<f64>(base, 1, &mut make_rng(11)).remove(0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| ym.residuals_at(std::hint::black_box(&x)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    geometric_product,
    frame_basis_jets,
    connection_routes,
    yangmills_residuals
);
criterion_main!(benches);
