//! The ideal `{nix(f) : f ∈ D}` of the clone `D` generated by the
//! idempotent operations and some unary operations.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use serde::Serialize;

use super::{dominate_certificate, FilterError};
use crate::ops::{compose, nix_set, Certificate, CompositionTree, OpTable, Subset};

/// How a member of the ideal was reached.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind")]
pub enum IdealStep {
    /// `∅`, the identity.
    Identity,
    /// The nix-set of the input generator with this index.
    Generator { index: usize },
    /// A subset of a member: the member's witness restricted to `set`.
    /// The certificate is over `[H, witness(from)]`.
    Downward { from: Subset, certificate: Certificate },
    /// Disjoint union: `f2 ∘ f1'`, where `f1'` moves `left` away from the
    /// union. Certificate generators are `[H, f1, f2]`.
    Union {
        left: Subset,
        right: Subset,
        certificate: Certificate,
    },
    /// Two points `{a}`, `{b}` on a 2-element base: the swap, as
    /// `H(x, f1(x), f2(x))` with `H` ternary idempotent.
    TwoPointSwap {
        left: Subset,
        right: Subset,
        certificate: Certificate,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct IdealMember {
    pub set: Subset,
    /// A unary operation of `D` with `nix = set`.
    pub witness: OpTable,
    pub step: IdealStep,
}

#[derive(Debug, Clone, Serialize)]
pub struct NixIdeal {
    pub base: usize,
    /// Union of all generator nix-sets; the ideal is its power set.
    pub top: Subset,
    /// Sorted by bitmask.
    pub members: Vec<IdealMember>,
}

impl NixIdeal {
    pub fn contains(&self, set: Subset) -> bool {
        set.is_subset(self.top)
    }

    pub fn sets(&self) -> impl Iterator<Item = Subset> + '_ {
        self.members.iter().map(|m| m.set)
    }

    pub fn member(&self, set: Subset) -> Option<&IdealMember> {
        self.members
            .binary_search_by_key(&set.bits(), |m| m.set.bits())
            .ok()
            .map(|i| &self.members[i])
    }

    /// Re-checks every witness: its nix-set, and that its certificate
    /// evaluates to it.
    pub fn verify(&self) -> bool {
        self.members.iter().all(|m| {
            nix_set(&m.witness) == m.set
                && match &m.step {
                    IdealStep::Identity | IdealStep::Generator { .. } => true,
                    IdealStep::Downward { certificate, .. }
                    | IdealStep::Union { certificate, .. }
                    | IdealStep::TwoPointSwap { certificate, .. } => certificate.certifies(&m.witness),
                }
        })
    }
}

fn downward(from: &OpTable, set: Subset) -> Result<(OpTable, Certificate), FilterError> {
    let g = OpTable::from_fn(from.base(), 1, |t| {
        if set.contains(t[0] as usize) {
            from.table()[t[0] as usize]
        } else {
            t[0]
        }
    })?;
    let cert = dominate_certificate(&g, from)?;
    Ok((g, cert))
}

/// Disjoint union of two non-empty nix-sets.
fn disjoint_union(
    base: usize,
    (a1, f1): (Subset, &OpTable),
    (a2, f2): (Subset, &OpTable),
) -> Result<(OpTable, IdealStep), FilterError> {
    let rest = a1.union(a2).complement(base);
    if a1.len() < 2 && rest.is_empty() {
        if a2.len() >= 2 {
            return disjoint_union(base, (a2, f2), (a1, f1));
        }
        // q = 2 and two singletons: f1' would have nowhere to go
        let swap = OpTable::from_fn(2, 1, |t| 1 - t[0])?;
        let h = OpTable::from_fn(2, 3, |t| {
            if t[0] == t[1] && t[1] == t[2] {
                t[0]
            } else {
                1 - t[0]
            }
        })?;
        let x = CompositionTree::proj(1, 1);
        let cert = Certificate {
            generators: vec![h, f1.clone(), f2.clone()],
            tree: CompositionTree::apply(
                0,
                vec![
                    x.clone(),
                    CompositionTree::apply(1, vec![x.clone()]),
                    CompositionTree::apply(2, vec![x]),
                ],
            ),
        };
        assert!(cert.certifies(&swap));
        return Ok((
            swap,
            IdealStep::TwoPointSwap {
                left: a1,
                right: a2,
                certificate: cert,
            },
        ));
    }
    let cycle: Vec<usize> = a1.iter().collect();
    let f1p = OpTable::from_fn(base, 1, |t| {
        let x = t[0] as usize;
        if !a1.contains(x) {
            x as u8
        } else if let Some(b) = rest.min() {
            b as u8
        } else {
            let i = cycle.iter().position(|&c| c == x).expect("x in a1");
            cycle[(i + 1) % cycle.len()] as u8
        }
    })?;
    let inner = dominate_certificate(&f1p, f1)?;
    let composed = compose(f2, &[f1p])?;
    let cert = Certificate {
        generators: vec![inner.generators[0].clone(), f1.clone(), f2.clone()],
        tree: CompositionTree::apply(2, vec![inner.tree]),
    };
    assert!(cert.certifies(&composed));
    Ok((
        composed,
        IdealStep::Union {
            left: a1,
            right: a2,
            certificate: cert,
        },
    ))
}

/// All nix-sets of unary members of the clone generated by the idempotent
/// operations and `ops`, each with a witness and the step that built it.
///
/// Generators of higher arity contribute through their diagonals.
pub fn ideal_of_unary(base: usize, ops: &[OpTable]) -> Result<NixIdeal, FilterError> {
    let mut found: BTreeMap<u64, IdealMember> = BTreeMap::new();
    found.insert(
        0,
        IdealMember {
            set: Subset::EMPTY,
            witness: OpTable::identity(base)?,
            step: IdealStep::Identity,
        },
    );
    let mut top = Subset::EMPTY;
    for (index, op) in ops.iter().enumerate() {
        if op.base() != base {
            return Err(FilterError::BaseMismatch(base, op.base()));
        }
        let d = crate::ops::diagonal(op);
        let set = nix_set(&d);
        found.entry(set.bits()).or_insert(IdealMember {
            set,
            witness: d,
            step: IdealStep::Generator { index },
        });
        // fold the new set into the running union
        let new_part = set.difference(top);
        if new_part.is_empty() || top.is_empty() {
            top = top.union(set);
            continue;
        }
        let src = found[&set.bits()].witness.clone();
        if let Entry::Vacant(slot) = found.entry(new_part.bits()) {
            let (w, certificate) = downward(&src, new_part)?;
            slot.insert(IdealMember {
                set: new_part,
                witness: w,
                step: IdealStep::Downward { from: set, certificate },
            });
        }
        let union = top.union(new_part);
        if !found.contains_key(&union.bits()) {
            let (w, step) = disjoint_union(
                base,
                (top, &found[&top.bits()].witness),
                (new_part, &found[&new_part.bits()].witness),
            )?;
            debug_assert_eq!(nix_set(&w), union);
            found.insert(
                union.bits(),
                IdealMember {
                    set: union,
                    witness: w,
                    step,
                },
            );
        }
        top = union;
    }
    let top_witness = found[&top.bits()].witness.clone();
    for set in top.subsets() {
        if let Entry::Vacant(slot) = found.entry(set.bits()) {
            let (w, certificate) = downward(&top_witness, set)?;
            slot.insert(IdealMember {
                set,
                witness: w,
                step: IdealStep::Downward { from: top, certificate },
            });
        }
    }
    Ok(NixIdeal {
        base,
        top,
        members: found.into_values().collect(),
    })
}
