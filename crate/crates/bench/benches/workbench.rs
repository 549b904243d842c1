//! End-to-end benchmarks over the workbench pipeline: generation,
//! substitution, solving, proof checking, and the semantic oracles.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use kneser_core::cdcl::{solve_cnf, Budget};
use kneser_core::cnf::gen_cnf;
use kneser_core::counting::build_count;
use kneser_core::numbering::Domain;
use kneser_core::oracle::{find_mono_disjoint, k2};
use kneser_core::proof::{check_refutation, import_drat, transport, CheckMode};
use kneser_core::subst::{build_phi, verify_image};
use kneser_core::{Coloring, Variant};

fn bench_gen(c: &mut Criterion) {
    c.bench_function("gen kneser(3,12)", |b| {
        b.iter(|| gen_cnf(Variant::Kneser, black_box(12), 3, None).unwrap())
    });
    c.bench_function("gen schrijver(2,12)", |b| {
        b.iter(|| gen_cnf(Variant::Schrijver, black_box(12), 2, None).unwrap())
    });
}

fn bench_subst(c: &mut Criterion) {
    c.bench_function("build_phi k=2 n=12", |b| {
        b.iter(|| build_phi(2, black_box(12), Variant::Kneser).unwrap())
    });
    c.bench_function("verify_image k=1 n=10", |b| {
        let phi = build_phi(1, 10, Variant::Kneser).unwrap();
        b.iter(|| verify_image(black_box(&phi)).unwrap())
    });
}

fn bench_solve_and_check(c: &mut Criterion) {
    let cnf = gen_cnf(Variant::Kneser, 7, 2, None).unwrap();
    c.bench_function("cdcl kneser(2,7)", |b| {
        b.iter(|| solve_cnf(black_box(&cnf), &Budget::default(), false).unwrap())
    });

    let outcome = solve_cnf(&cnf, &Budget::default(), true).unwrap();
    let drat = outcome.drat.unwrap();
    c.bench_function("drat import kneser(2,7)", |b| {
        b.iter(|| import_drat(black_box(&cnf), &mut drat.as_bytes()).unwrap())
    });

    let proof = import_drat(&cnf, &mut drat.as_bytes()).unwrap();
    c.bench_function("strict check kneser(2,7)", |b| {
        b.iter(|| check_refutation(black_box(&cnf), &proof, CheckMode::Strict))
    });

    let phi = build_phi(1, 7, Variant::Kneser).unwrap();
    c.bench_function("transport kneser(2,7)", |b| {
        b.iter(|| transport(black_box(&proof), &phi).unwrap())
    });
}

fn bench_counting(c: &mut Criterion) {
    c.bench_function("popcount circuit n=64", |b| {
        b.iter(|| build_count(black_box(64)).unwrap())
    });
    let circuit = build_count(32).unwrap();
    let input: Vec<bool> = (0..32).map(|i| i % 3 == 0).collect();
    c.bench_function("popcount eval n=32", |b| {
        b.iter(|| circuit.eval(black_box(&input)).unwrap())
    });
}

fn bench_oracles(c: &mut Criterion) {
    c.bench_function("audit_k2 n=9", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        b.iter_batched(
            || Coloring::random(9, 2, 6, Domain::All, &mut rng).unwrap(),
            |coloring| k2::audit_k2(black_box(&coloring)).unwrap(),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("witness extraction k=3 n=9", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        b.iter_batched(
            || Coloring::random(9, 3, 4, Domain::All, &mut rng).unwrap(),
            |coloring| find_mono_disjoint(black_box(&coloring)).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    bench_gen,
    bench_subst,
    bench_solve_and_check,
    bench_counting,
    bench_oracles
);
criterion_main!(benches);
