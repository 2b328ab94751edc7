use std::collections::HashSet;

use super::{CongruenceOrder, Relation, Semilattice, SemilatticeError};
use crate::ops::{Certificate, CompositionTree, OpTable};

/// `χ_{a,b}`: sends `b` to `a` and fixes everything else.
pub fn chi(s: &Semilattice, a: usize, b: usize) -> OpTable {
    OpTable::from_fn(s.size(), 1, |t| if t[0] as usize == b { a as u8 } else { t[0] })
        .expect("unary table over a valid base")
}

/// `f ∈ E(⊑)`: `f(x) ⊑ x1 ∨ .. ∨ xk` for every tuple.
pub fn e_member(s: &Semilattice, order: &CongruenceOrder, f: &OpTable) -> bool {
    f.base() == s.size()
        && f
            .entries()
            .all(|(t, v)| order.holds(v as usize, s.join_all(&t) as usize))
}

/// `f ∈ ⋂_a Pol{x : x ⊑ a}`, the intersection form of [`e_member`].
pub fn e_member_via_pol(s: &Semilattice, order: &CongruenceOrder, f: &OpTable) -> bool {
    f.base() == s.size()
        && (0..s.size()).all(|a| {
            let down: crate::ops::Subset = (0..s.size()).filter(|&x| order.holds(x, a)).collect();
            crate::engine::pol_member(down, f)
        })
}

/// Least congruence order containing `≤` and the given pairs.
pub fn least_congruence_order(
    s: &Semilattice,
    pairs: impl IntoIterator<Item = (usize, usize)>,
) -> CongruenceOrder {
    let q = s.size();
    let mut rel: Relation = s.order();
    for (a, b) in pairs {
        rel.insert(a, b);
    }
    loop {
        rel.transitive_closure();
        let mut changed = false;
        for z in 0..q {
            let below: Vec<usize> = (0..q).filter(|&x| rel.holds(x, z)).collect();
            for (i, &x) in below.iter().enumerate() {
                for &y in &below[i + 1..] {
                    changed |= rel.insert(s.join(x, y), z);
                }
            }
        }
        if !changed {
            return CongruenceOrder::new_unchecked(rel);
        }
    }
}

/// `⊑` of the local clone generated by `E(≤)` and the unary operations:
/// the least congruence order with `f(y) ⊑ y` for every `f` and `y`.
pub fn order_of_unary_generators(
    s: &Semilattice,
    unary: &[OpTable],
) -> Result<CongruenceOrder, SemilatticeError> {
    let q = s.size();
    for f in unary {
        if f.arity() != 1 {
            return Err(SemilatticeError::NotBinary);
        }
        if f.base() != q {
            return Err(SemilatticeError::SizeMismatch {
                expected: q,
                got: f.base(),
            });
        }
    }
    Ok(least_congruence_order(
        s,
        unary
            .iter()
            .flat_map(|f| (0..q).map(move |y| (f.table()[y] as usize, y))),
    ))
}

/// Result of [`e_interpolate`]: an operation matching `f` on the given
/// tuples, built from members of `E(⊑)`.
#[derive(Debug, Clone)]
pub struct EInterpolation {
    pub op: OpTable,
    /// Generators are `∨`, then the `g_i`, then the `h_i`.
    pub certificate: Certificate,
}

/// Interpolates `f ∈ E(⊑)` on finitely many tuples by a term over `∨`,
/// unary maps `χ_{b_i, d_i}`, and the `(k+1)`-ary maps
/// `h_i(y, x) = y if x = a_i else 0`.
///
/// With `d_i = ⋁a_i` and `b_i = f(a_i)`, the output is
/// `f'(x) = ⋁_i h_i(g_i(⋁x), x)` and satisfies `f'(a_i) = b_i`. The lower
/// bound required of `h_i` off `a_i` is always met by the least element `0`.
pub fn e_interpolate(
    s: &Semilattice,
    order: &CongruenceOrder,
    f: &OpTable,
    tuples: &[Vec<u8>],
) -> Result<EInterpolation, SemilatticeError> {
    let q = s.size();
    if f.base() != q {
        return Err(SemilatticeError::SizeMismatch {
            expected: q,
            got: f.base(),
        });
    }
    let k = f.arity();
    let mut seen = HashSet::new();
    if tuples.is_empty()
        || tuples.iter().any(|t| {
            t.len() != k || t.iter().any(|&x| x as usize >= q) || !seen.insert(t.clone())
        })
    {
        return Err(SemilatticeError::BadTuples);
    }
    let n = tuples.len();

    let mut generators = vec![s.join_table().clone()];
    let mut hs = Vec::with_capacity(n);
    for a in tuples {
        let d = s.join_all(a) as usize;
        let b = f.eval(a) as usize;
        if !order.holds(b, d) {
            return Err(SemilatticeError::NotBelow { b, d });
        }
        generators.push(chi(s, b, d));
        hs.push(
            OpTable::from_fn(q, k + 1, |t| if &t[1..] == a.as_slice() { t[0] } else { 0 })
                .map_err(SemilatticeError::Op)?,
        );
    }
    generators.extend(hs);

    let join_of = |ts: Vec<CompositionTree>| {
        ts.into_iter()
            .reduce(|acc, t| CompositionTree::apply(0, vec![acc, t]))
            .expect("at least one argument")
    };
    let vars: Vec<CompositionTree> = (1..=k).map(|i| CompositionTree::proj(k, i)).collect();
    let big_join = join_of(vars.clone());
    let parts: Vec<CompositionTree> = (0..n)
        .map(|i| {
            let g = CompositionTree::apply(1 + i, vec![big_join.clone()]);
            let mut args = vec![g];
            args.extend(vars.iter().cloned());
            CompositionTree::apply(1 + n + i, args)
        })
        .collect();
    let certificate = Certificate {
        generators,
        tree: join_of(parts),
    };
    let op = certificate.evaluate(q).map_err(SemilatticeError::Op)?;
    debug_assert!(tuples.iter().all(|a| op.eval(a) == f.eval(a)));
    Ok(EInterpolation { op, certificate })
}
