use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shtuka_bench::{four_zero_q3, squarefree_q3};
use shtuka_core::tate::{analyze_surface, SurfaceMeta};
use shtuka_core::{generic_fiber, FiberOptions, FiniteField, UPoly};

fn field_ops(c: &mut Criterion) {
    let f = FiniteField::new(2, 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xs: Vec<_> = (0..1024).map(|_| f.random_nonzero(&mut rng)).collect();
    c.bench_function("F_1024 mul+inv x1024", |b| {
        b.iter(|| {
            let mut acc = f.one();
            for &x in &xs {
                acc = f.mul(acc, f.inv(x).unwrap());
            }
            black_box(acc)
        })
    });
}

fn factorization(c: &mut Criterion) {
    let f = FiniteField::new(3, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut coeffs: Vec<_> = (0..24).map(|_| f.random(&mut rng)).collect();
    coeffs.push(f.one());
    let poly = UPoly::new(&f, coeffs);
    c.bench_function("factor degree 24 over F_9", |b| {
        b.iter(|| black_box(poly.factor()))
    });
}

fn surfaces(c: &mut Criterion) {
    let (_, tf) = four_zero_q3();
    c.bench_function("generic fiber 4(0) q=3", |b| {
        b.iter(|| generic_fiber(black_box(&tf), FiberOptions::default()).unwrap())
    });
    let (_, tf) = squarefree_q3();
    c.bench_function("full analysis squarefree q=3", |b| {
        b.iter(|| {
            let gf = generic_fiber(&tf, FiberOptions::default()).unwrap();
            analyze_surface(&gf.curve, SurfaceMeta::default()).unwrap()
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = field_ops, factorization, surfaces
}
criterion_main!(benches);
