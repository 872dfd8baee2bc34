use std::hint::black_box;

use coalg_core::homology::{ext_vs_algebra, local_cohomology, minimalize, standard_resolution};
use coalg_core::regularity::{cy_check, default_family, nakayama};
use coalg_core::repmod::{random_rep, simple};
use coalg_core::{FieldSpec, Matrix, Quiver, Side};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(field: FieldSpec, n: usize, rng: &mut impl Rng) -> Matrix {
    let mut m = Matrix::zeros(field, n, n);
    for i in 0..n {
        for j in 0..n {
            if rng.random_bool(0.3) {
                m.set(i, j, field.from_i64(rng.random_range(-5..=5)));
            }
        }
    }
    m
}

fn rank(c: &mut Criterion) {
    let mut g = c.benchmark_group("rank");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for field in [FieldSpec::Rationals, FieldSpec::Prime(7)] {
        for n in [16, 48] {
            let m = random_matrix(field, n, &mut rng);
            g.bench_with_input(BenchmarkId::new(field.to_string(), n), &m, |b, m| {
                b.iter(|| black_box(m).rank())
            });
        }
    }
    g.finish();
}

fn ext_against_algebra(c: &mut Criterion) {
    let mut g = c.benchmark_group("ext_vs_algebra");
    for k in [1, 2, 3] {
        let q = Quiver::cycle(k);
        let s = simple(&q, 0, Side::Left, FieldSpec::Rationals);
        g.bench_with_input(BenchmarkId::new("cycle", k), &s, |b, s| {
            b.iter(|| ext_vs_algebra(s, 1, 12).unwrap())
        });
    }
    g.finish();
}

fn resolution(c: &mut Criterion) {
    let q = Quiver::cycle(3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let m = random_rep(&q, Side::Left, FieldSpec::Rationals, &[2, 2, 2], 0.5, &mut rng);
    c.bench_function("minimal_resolution/3-cycle", |b| {
        b.iter(|| minimalize(&standard_resolution(&m, 10).unwrap()))
    });
}

fn local_and_serre(c: &mut Criterion) {
    let q = Quiver::cycle(2);
    c.bench_function("local_cohomology/2-cycle", |b| {
        b.iter(|| local_cohomology(&q, FieldSpec::Rationals, 1, 10, 10).unwrap())
    });
    let l = Quiver::loop_quiver();
    let nak = nakayama(&l, FieldSpec::Rationals, 10, 10).unwrap();
    let fam = default_family(&l, FieldSpec::Rationals, 3);
    c.bench_function("cy_check/loop", |b| b.iter(|| cy_check(&fam, &nak).unwrap()));
}

criterion_group!(benches, rank, ext_against_algebra, resolution, local_and_serre);
criterion_main!(benches);
