//! Seeded random members of `Pol(s^n)` and theorem instances.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;

use super::{parallel_offset, periodic_op, shift_tuple, Point, Step, WindowedOp, Window};

pub fn random_tuple<R: Rng>(rng: &mut R, arity: usize, y_count: u32, lo: i64, hi: i64) -> Vec<Point> {
    (0..arity)
        .map(|_| Point::new(rng.gen_range(0..y_count), rng.gen_range(lo..=hi)))
        .collect()
}

/// Every in-window shift of every base tuple, deduplicated and sorted.
pub fn saturate(window: Window, bases: &[Vec<Point>]) -> Vec<Vec<Point>> {
    let mut out = BTreeSet::new();
    for b in bases {
        for t in window.shifts_of(b) {
            out.insert(shift_tuple(b, t));
        }
    }
    out.into_iter().collect()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// A random operation on the saturation of `bases` that commutes with
/// `s^n` for every `n` in `steps`.
///
/// Tuples joined by chains of steps form one class; each class gets a random
/// target component and level displacement, measured from the first
/// coordinate. Values leaving the window are dropped.
pub fn sample_equivariant<R: Rng>(
    rng: &mut R,
    steps: &[u64],
    arity: usize,
    y_count: u32,
    window: Window,
    bases: &[Vec<Point>],
) -> WindowedOp {
    let domain = saturate(window, bases);
    let index: HashMap<&Vec<Point>, usize> = domain.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut parent: Vec<usize> = (0..domain.len()).collect();
    for (i, t) in domain.iter().enumerate() {
        for &s in steps.iter().filter(|&&s| s > 0) {
            if let Some(&j) = index.get(&shift_tuple(t, s as i64)) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut class_value: HashMap<usize, (u32, i64)> = HashMap::new();
    let mut op = WindowedOp::empty(arity, window).expect("positive arity");
    for (i, t) in domain.iter().enumerate() {
        let root = find(&mut parent, i);
        let (c, disp) = *class_value
            .entry(root)
            .or_insert_with(|| (rng.gen_range(0..y_count), rng.gen_range(-2..=2)));
        let v = Point::new(c, t[0].level + disp);
        if window.contains(v.level) {
            op.insert(t.clone(), v).expect("fresh key inside the window");
        }
    }
    op
}

/// A random member of `Pol(s^n)`: unary ops on every window point, higher
/// arities on the saturation of a few random tuples.
pub fn sample_pol_sn<R: Rng>(rng: &mut R, n: u64, arity: usize, y_count: u32, window: Window) -> WindowedOp {
    let bases = sample_bases(rng, arity, y_count, window);
    sample_equivariant(rng, &[n], arity, y_count, window, &bases)
}

/// Every point for unary samples, six random tuples otherwise.
pub fn sample_bases<R: Rng>(rng: &mut R, arity: usize, y_count: u32, window: Window) -> Vec<Vec<Point>> {
    if arity == 1 {
        window.points(y_count).map(|p| vec![p]).collect()
    } else {
        (0..6)
            .map(|_| random_tuple(rng, arity, y_count, window.lo(), window.hi()))
            .collect()
    }
}

/// Input for `theorem_interpolation` with a known `n*`.
#[derive(Debug, Clone)]
pub struct TheoremInstance {
    pub n_star: u64,
    pub g: WindowedOp,
    pub tuples: Vec<Vec<Point>>,
    pub witnesses: Vec<WindowedOp>,
}

/// Up to `max_tuples` tuples near the middle of the window, pairwise not
/// `s^{n*}`-parallel; about half are shifts of an earlier tuple by a
/// non-multiple of `n*`, so separators are needed. `g` is a random member of
/// `Pol(s^{n*})` defined on them and the witness is the period-`n*` map.
pub fn random_theorem_instance<R: Rng>(
    rng: &mut R,
    n_star: u64,
    max_tuples: usize,
    y_count: u32,
    window: Window,
) -> TheoremInstance {
    assert!(n_star >= 2 && max_tuples >= 1);
    let mid = (window.lo() + window.hi()) / 2;
    let r = (window.span() / 4).max(1);
    let (lo, hi) = (mid - r, mid + r);
    let witnesses = vec![periodic_op(y_count, window, n_star).expect("n* > 0")];
    loop {
        let arity = rng.gen_range(1..=2);
        let count = rng.gen_range(1..=max_tuples);
        let mut tuples: Vec<Vec<Point>> = Vec::new();
        let mut attempts = 0;
        while tuples.len() < count && attempts < 100 {
            attempts += 1;
            let t = if !tuples.is_empty() && rng.gen_bool(0.5) {
                let src = &tuples[rng.gen_range(0..tuples.len())];
                let l = rng.gen_range(-3..=3i64);
                if l.rem_euclid(n_star as i64) == 0 {
                    continue;
                }
                shift_tuple(src, l)
            } else {
                random_tuple(rng, arity, y_count, lo, hi)
            };
            let in_range = t.iter().all(|p| lo - 3 <= p.level && p.level <= hi + 3);
            let clash = tuples
                .iter()
                .any(|u| parallel_offset(u, &t, Step::Multiple(n_star)).is_some());
            if in_range && !clash {
                tuples.push(t);
            }
        }
        let g = sample_equivariant(rng, &[n_star], arity, y_count, window, &tuples);
        if tuples.iter().all(|t| g.get(t).is_some()) {
            return TheoremInstance {
                n_star,
                g,
                tuples,
                witnesses,
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::{pol_sn_member, theorem_interpolation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_are_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let win = Window::new(-10, 10).unwrap();
        for n in 1..=4 {
            for arity in 1..=2 {
                let f = sample_pol_sn(&mut rng, n, arity, 2, win);
                assert!(!f.is_empty());
                assert!(pol_sn_member(&f, n));
                assert!(pol_sn_member(&f, 2 * n));
            }
        }
    }

    #[test]
    fn two_steps_give_the_gcd() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let win = Window::new(-24, 24).unwrap();
        let bases: Vec<Vec<Point>> = win.points(2).map(|p| vec![p]).collect();
        let f = sample_equivariant(&mut rng, &[4, 6], 1, 2, win, &bases);
        assert!(pol_sn_member(&f, 4) && pol_sn_member(&f, 6));
        let inner = f.restrict(win.inner(6).unwrap());
        let r = crate::shift::shift_group(&[inner]).unwrap();
        assert_eq!(r.n_star, 2);
    }

    #[test]
    fn instances_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let win = Window::new(-24, 24).unwrap();
        for i in 0..20 {
            let inst = random_theorem_instance(&mut rng, 2 + i % 2, 4, 2, win);
            let out = theorem_interpolation(&inst.g, &inst.tuples, &inst.witnesses).unwrap();
            assert_eq!(out.n_star, inst.n_star);
            for t in &inst.tuples {
                assert_eq!(out.op.get(t), inst.g.get(t));
            }
        }
    }
}
