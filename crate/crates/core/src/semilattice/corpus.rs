//! Named and random small semilattices used by the checks.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::Semilattice;

/// A union-closed family of bitmasks (containing `0`) as a semilattice.
/// Elements are labelled by `(popcount, mask)` so `∅` becomes `0`.
pub fn from_union_closed(sets: &BTreeSet<u64>) -> Semilattice {
    let mut elems: Vec<u64> = sets.iter().copied().collect();
    elems.sort_by_key(|m| (m.count_ones(), *m));
    debug_assert_eq!(elems[0], 0);
    let pos = |m: u64| elems.iter().position(|&e| e == m).expect("union closed");
    let rows = elems
        .iter()
        .map(|&a| elems.iter().map(|&b| pos(a | b) as u8).collect())
        .collect();
    Semilattice::from_matrix(rows).expect("union is a join")
}

fn union_closure(seeds: impl IntoIterator<Item = u64>) -> BTreeSet<u64> {
    let mut sets: BTreeSet<u64> = seeds.into_iter().collect();
    sets.insert(0);
    loop {
        let snapshot: Vec<u64> = sets.iter().copied().collect();
        let before = sets.len();
        for &a in &snapshot {
            for &b in &snapshot {
                sets.insert(a | b);
            }
        }
        if sets.len() == before {
            return sets;
        }
    }
}

/// `M3` as a join-semilattice: `0`, three atoms, and a top.
pub fn m3() -> Semilattice {
    // atoms {0,1}, {0,2}, {1,2}: pairwise unions all give {0,1,2}
    from_union_closed(&union_closure([0b011, 0b101, 0b110]))
}

/// `N5`: `0 < a < b < 1` with `c` incomparable to `a` and `b`.
pub fn n5() -> Semilattice {
    from_union_closed(&union_closure([0b001, 0b011, 0b110]))
}

/// The Boolean lattice `2^k`.
pub fn boolean(k: usize) -> Semilattice {
    from_union_closed(&union_closure((0..k).map(|i| 1u64 << i)))
}

/// The product of two chains of the given sizes.
pub fn chain_product(a: usize, b: usize) -> Semilattice {
    let rows = (0..a * b)
        .map(|x| {
            (0..a * b)
                .map(|y| ((x / b).max(y / b) * b + (x % b).max(y % b)) as u8)
                .collect()
        })
        .collect();
    Semilattice::from_matrix(rows).expect("product of chains")
}

/// A random semilattice with `2..=max_size` elements: the union closure of
/// random subsets of a 4-element universe, with non-zero labels shuffled.
pub fn random_semilattice<R: Rng>(rng: &mut R, max_size: usize) -> Semilattice {
    assert!(max_size >= 2);
    loop {
        let seeds: Vec<u64> = (0..rng.gen_range(1..=4))
            .map(|_| rng.gen_range(1..16u64))
            .collect();
        let sets = union_closure(seeds);
        if sets.len() > max_size {
            continue;
        }
        let base = from_union_closed(&sets);
        let q = base.size();
        let mut perm: Vec<usize> = (1..q).collect();
        perm.shuffle(rng);
        perm.insert(0, 0);
        let mut rows = vec![vec![0u8; q]; q];
        for a in 0..q {
            for b in 0..q {
                rows[perm[a]][perm[b]] = perm[base.join(a, b)] as u8;
            }
        }
        return Semilattice::from_matrix(rows).expect("relabelled semilattice");
    }
}

/// Chains of size `1..=max_size`, the named small lattices that fit, and
/// `random` seeded random semilattices.
pub fn standard_corpus<R: Rng>(rng: &mut R, max_size: usize, random: usize) -> Vec<(String, Semilattice)> {
    let mut out: Vec<(String, Semilattice)> = (1..=max_size)
        .map(|n| (format!("chain{n}"), Semilattice::chain(n).expect("chain")))
        .collect();
    let named = [
        ("M3", m3()),
        ("N5", n5()),
        ("2^2", boolean(2)),
        ("2^3", boolean(3)),
        ("2x3", chain_product(2, 3)),
    ];
    out.extend(
        named
            .into_iter()
            .filter(|(_, s)| s.size() <= max_size)
            .map(|(n, s)| (n.to_string(), s)),
    );
    for i in 0..random {
        out.push((format!("random{i}"), random_semilattice(rng, max_size)));
    }
    out
}
