use std::hint::black_box;

use cloneforge_core::filter::{membership_by_certificate, unary_with_fix};
use cloneforge_core::ops::tuples;
use cloneforge_core::semilattice::corpus::n5;
use cloneforge_core::semilattice::{congruence_to_order, e_interpolate, enumerate_congruences, DEFAULT_ENUMERATION_BOUND};
use cloneforge_core::shift::sample::random_theorem_instance;
use cloneforge_core::shift::theorem_interpolation;
use cloneforge_core::{generate_clone, OpTable, Semilattice, Subset, Window};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn closure(c: &mut Criterion) {
    let mux = OpTable::from_fn(2, 3, |x| if x[0] == 1 { x[1] } else { x[2] }).unwrap();
    let zero = OpTable::constant(2, 0).unwrap();
    c.bench_function("generate_clone/mux+0, q=2, arity<=3", |b| {
        b.iter(|| generate_clone(black_box(&[mux.clone(), zero.clone()]), 2, 3, 2_000_000).unwrap())
    });
    let max3 = OpTable::from_fn(3, 2, |x| x[0].max(x[1])).unwrap();
    c.bench_function("generate_clone/max, q=3, arity<=3", |b| {
        b.iter(|| generate_clone(black_box(std::slice::from_ref(&max3)), 3, 3, 2_000_000).unwrap())
    });
}

fn congruences(c: &mut Criterion) {
    let chain = Semilattice::chain(8).unwrap();
    c.bench_function("enumerate_congruences/chain8", |b| {
        b.iter(|| enumerate_congruences(black_box(&chain), DEFAULT_ENUMERATION_BOUND).unwrap())
    });
}

fn e_interpolation(c: &mut Criterion) {
    let s = n5();
    let cons = enumerate_congruences(&s, DEFAULT_ENUMERATION_BOUND).unwrap();
    let r = congruence_to_order(&s, &cons[cons.len() / 2]);
    let f = OpTable::from_fn(s.size(), 2, |x| s.join(x[0] as usize, x[1] as usize) as u8).unwrap();
    let all: Vec<Vec<u8>> = tuples(s.size(), 2).collect();
    c.bench_function("e_interpolate/N5, all binary tuples", |b| {
        b.iter(|| e_interpolate(&s, &r, black_box(&f), &all).unwrap())
    });
}

fn certificates(c: &mut Criterion) {
    let q = 4;
    let a = Subset::from_bits(0b0101);
    let g = unary_with_fix(q, a).unwrap();
    let f = OpTable::from_fn(q, 3, |x| if x[0] == x[1] && x[1] == x[2] && a.contains(x[0] as usize) { x[0] } else { (x[0] + 2 * x[1] + x[2]) % 4 }).unwrap();
    c.bench_function("membership_by_certificate/q=4 ternary", |b| {
        b.iter(|| membership_by_certificate(black_box(&f), a, &g).unwrap())
    });
}

fn theorem(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let win = Window::new(-24, 24).unwrap();
    let inst = random_theorem_instance(&mut rng, 3, 4, 2, win);
    c.bench_function("theorem_interpolation/n*=3", |b| {
        b.iter(|| theorem_interpolation(black_box(&inst.g), &inst.tuples, &inst.witnesses).unwrap())
    });
}

criterion_group!(benches, closure, congruences, e_interpolation, certificates, theorem);
criterion_main!(benches);
