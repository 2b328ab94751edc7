//! Clone generation, membership, and interpolation.
//!
//! A clone is given either extensionally, by generators and search bounds,
//! or intensionally, by a pointwise membership predicate. Bounded search can
//! only ever say "not found yet" about operations above the arity bound, so
//! every answer for generated clones is three-valued.

mod closure;

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use closure::{
    generate_clone, ClosureExport, ClosureResult, Derivation, LayerExport, OpExport, CLOSURE_NOTE,
};

use crate::filter::PrincipalFilter;
use crate::ops::{tuples, CompositionTree, OpError, OpTable, Subset};
use crate::semilattice::{CongruenceOrder, Semilattice};

#[derive(Debug, Error)]
pub enum CloneError {
    #[error(transparent)]
    Op(#[from] OpError),
    #[error("base sizes differ: {0} vs {1}")]
    BaseMismatch(usize, usize),
    #[error("arity and size bounds must be positive")]
    BadBounds,
    #[error("arity bound {bound} is below the generator arity {arity}")]
    BoundBelowGenerator { bound: usize, arity: usize },
    #[error("closure exceeded the size bound of {bound} tables")]
    SizeBoundExceeded {
        bound: usize,
        partial: Box<ClosureResult>,
    },
    #[error("undecided at the current bounds")]
    Undecided,
    #[error("exhaustive enumeration of {needed} operations exceeds the budget of {budget}")]
    Infeasible { needed: u128, budget: u64 },
    #[error("interpolation window is malformed: {0}")]
    BadWindow(String),
}

/// Search budgets shared by the engine and the runner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    pub arity_bound: usize,
    pub size_bound: usize,
    /// Largest member count `clone_leq_upto` will enumerate exhaustively.
    pub exhaustive_budget: u64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            arity_bound: 3,
            size_bound: 2_000_000,
            exhaustive_budget: 1 << 22,
            samples: 200,
            seed: 0,
        }
    }
}

/// Membership answer. Generated clones answer `Member` with a derivation tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Member(Option<CompositionTree>),
    NonMember,
    Undecided,
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }
}

/// A witness that a finite partial function extends to a clone member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterpolationWitness {
    pub op: OpTable,
    /// Derivation tree when the clone is generated.
    pub tree: Option<CompositionTree>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Interpolation {
    /// `None` only for the empty window, where nothing needs to be matched.
    Interpolable(Option<InterpolationWitness>),
    NotInterpolable,
    Undecided,
}

impl Interpolation {
    pub fn is_interpolable(&self) -> bool {
        matches!(self, Interpolation::Interpolable(_))
    }
}

/// Clones whose membership condition constrains each tuple separately.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    /// Every operation.
    All { base: usize },
    /// `f(x, .., x) = x`.
    Idempotent { base: usize },
    /// Operations preserving a subset.
    Preserves { base: usize, subset: Subset },
    /// Operations whose fix-set lies in a filter.
    Filter(PrincipalFilter),
    /// `f(x) ⊑ x1 ∨ .. ∨ xk` for a congruence order `⊑`.
    BelowJoin {
        semilattice: Semilattice,
        order: CongruenceOrder,
    },
}

impl Predicate {
    pub fn base(&self) -> usize {
        match self {
            Predicate::All { base }
            | Predicate::Idempotent { base }
            | Predicate::Preserves { base, .. } => *base,
            Predicate::Filter(f) => f.base(),
            Predicate::BelowJoin { semilattice, .. } => semilattice.size(),
        }
    }

    /// Whether a member may take `value` at `tuple`.
    pub fn allows(&self, tuple: &[u8], value: u8) -> bool {
        let diagonal = || tuple.iter().all(|&x| x == tuple[0]);
        match self {
            Predicate::All { .. } => true,
            Predicate::Idempotent { .. } => !diagonal() || value == tuple[0],
            Predicate::Preserves { subset, .. } => {
                !tuple.iter().all(|&x| subset.contains(x as usize))
                    || subset.contains(value as usize)
            }
            Predicate::Filter(f) => {
                !diagonal() || !f.generator().contains(tuple[0] as usize) || value == tuple[0]
            }
            Predicate::BelowJoin { semilattice, order } => {
                order.holds(value as usize, semilattice.join_all(tuple) as usize)
            }
        }
    }

    /// A value every member-compatible table may use at `tuple`; the table
    /// built from these values is itself a member.
    pub fn default_value(&self, tuple: &[u8]) -> u8 {
        match self {
            Predicate::BelowJoin { semilattice, .. } => semilattice.join_all(tuple),
            _ => tuple[0],
        }
    }

    pub fn allowed_values(&self, tuple: &[u8]) -> Vec<u8> {
        (0..self.base() as u8)
            .filter(|&v| self.allows(tuple, v))
            .collect()
    }

    pub fn contains(&self, f: &OpTable) -> bool {
        f.base() == self.base() && f.entries().all(|(t, v)| self.allows(&t, v))
    }

    /// Number of `arity`-ary members.
    pub fn count(&self, arity: usize) -> u128 {
        tuples(self.base(), arity).fold(1u128, |acc, t| {
            acc.saturating_mul(self.allowed_values(&t).len() as u128)
        })
    }
}

/// A clone, given by generators or by a predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CloneSpec {
    Generated {
        base: usize,
        generators: Vec<OpTable>,
        arity_bound: usize,
        size_bound: usize,
    },
    Predicate(Predicate),
}

impl CloneSpec {
    pub fn generated(
        base: usize,
        generators: Vec<OpTable>,
        arity_bound: usize,
        size_bound: usize,
    ) -> Result<Self, CloneError> {
        if arity_bound == 0 || size_bound == 0 {
            return Err(CloneError::BadBounds);
        }
        for g in &generators {
            if g.base() != base {
                return Err(CloneError::BaseMismatch(base, g.base()));
            }
            if g.arity() > arity_bound {
                return Err(CloneError::BoundBelowGenerator {
                    bound: arity_bound,
                    arity: g.arity(),
                });
            }
        }
        Ok(CloneSpec::Generated {
            base,
            generators,
            arity_bound,
            size_bound,
        })
    }

    pub fn base(&self) -> usize {
        match self {
            CloneSpec::Generated { base, .. } => *base,
            CloneSpec::Predicate(p) => p.base(),
        }
    }

    /// Materializes generated clones; predicates pass through.
    pub fn resolve(&self) -> Result<ResolvedClone, CloneError> {
        match self {
            CloneSpec::Predicate(p) => Ok(ResolvedClone::Predicate(p.clone())),
            CloneSpec::Generated {
                base,
                generators,
                arity_bound,
                size_bound,
            } => match generate_clone(generators, *base, *arity_bound, *size_bound) {
                Ok(c) => Ok(ResolvedClone::Closure(c)),
                Err(CloneError::SizeBoundExceeded { partial, .. }) => {
                    Ok(ResolvedClone::Closure(*partial))
                }
                Err(e) => Err(e),
            },
        }
    }
}

/// A clone ready for repeated queries.
#[derive(Debug, Clone)]
pub enum ResolvedClone {
    Closure(ClosureResult),
    Predicate(Predicate),
}

impl ResolvedClone {
    pub fn base(&self) -> usize {
        match self {
            ResolvedClone::Closure(c) => c.base(),
            ResolvedClone::Predicate(p) => p.base(),
        }
    }

    pub fn contains(&self, f: &OpTable) -> Result<Membership, CloneError> {
        if f.base() != self.base() {
            return Err(CloneError::BaseMismatch(self.base(), f.base()));
        }
        Ok(match self {
            ResolvedClone::Predicate(p) => {
                if p.contains(f) {
                    Membership::Member(None)
                } else {
                    Membership::NonMember
                }
            }
            ResolvedClone::Closure(c) => match c.tree_of(f) {
                Some(tree) => Membership::Member(Some(tree)),
                None if c.saturated(f.arity()) => Membership::NonMember,
                None => Membership::Undecided,
            },
        })
    }

    pub fn interpolates(&self, window: &[(Vec<u8>, u8)]) -> Result<Interpolation, CloneError> {
        let Some(arity) = check_window(self.base(), window)? else {
            return Ok(Interpolation::Interpolable(None));
        };
        match self {
            ResolvedClone::Predicate(p) => {
                if !window.iter().all(|(t, v)| p.allows(t, *v)) {
                    return Ok(Interpolation::NotInterpolable);
                }
                let mut op = OpTable::from_fn(p.base(), arity, |t| p.default_value(t))?;
                for (t, v) in window {
                    op = op.with_value(t, *v)?;
                }
                debug_assert!(p.contains(&op));
                Ok(Interpolation::Interpolable(Some(InterpolationWitness {
                    op,
                    tree: None,
                })))
            }
            ResolvedClone::Closure(c) => {
                let found = c
                    .ops(arity)
                    .iter()
                    .find(|op| window.iter().all(|(t, v)| op.eval(t) == *v));
                Ok(match found {
                    Some(op) => Interpolation::Interpolable(Some(InterpolationWitness {
                        op: op.clone(),
                        tree: c.tree_of(op),
                    })),
                    None if c.saturated(arity) => Interpolation::NotInterpolable,
                    None => Interpolation::Undecided,
                })
            }
        }
    }

    /// All members of one arity. Predicates are enumerated exhaustively
    /// within `budget`.
    fn members(&self, arity: usize, budget: u64) -> Result<Vec<OpTable>, CloneError> {
        match self {
            ResolvedClone::Closure(c) => {
                if arity > c.arity_bound() || !c.saturated(arity) {
                    return Err(CloneError::Undecided);
                }
                Ok(c.ops(arity).to_vec())
            }
            ResolvedClone::Predicate(p) => {
                let needed = p.count(arity);
                if needed > budget as u128 {
                    return Err(CloneError::Infeasible { needed, budget });
                }
                let choices: Vec<Vec<u8>> =
                    tuples(p.base(), arity).map(|t| p.allowed_values(&t)).collect();
                let mut pick = vec![0usize; choices.len()];
                let mut out = Vec::with_capacity(needed as usize);
                loop {
                    let table = pick.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
                    out.push(OpTable::new(p.base(), arity, table)?);
                    let mut pos = pick.len();
                    loop {
                        if pos == 0 {
                            return Ok(out);
                        }
                        pos -= 1;
                        pick[pos] += 1;
                        if pick[pos] < choices[pos].len() {
                            break;
                        }
                        pick[pos] = 0;
                    }
                }
            }
        }
    }

    fn sample(&self, arity: usize, rng: &mut ChaCha8Rng) -> Result<OpTable, CloneError> {
        match self {
            ResolvedClone::Closure(c) => {
                let ops = c.ops(arity);
                if arity > c.arity_bound() || ops.is_empty() {
                    return Err(CloneError::Undecided);
                }
                Ok(ops[rng.gen_range(0..ops.len())].clone())
            }
            ResolvedClone::Predicate(p) => Ok(OpTable::from_fn(p.base(), arity, |t| {
                let vals = p.allowed_values(t);
                vals[rng.gen_range(0..vals.len())]
            })?),
        }
    }
}

/// Checks a window and returns its arity (`None` when empty).
fn check_window(base: usize, window: &[(Vec<u8>, u8)]) -> Result<Option<usize>, CloneError> {
    let Some((first, _)) = window.first() else {
        return Ok(None);
    };
    let arity = first.len();
    if arity == 0 {
        return Err(CloneError::BadWindow("empty tuple".into()));
    }
    let mut seen = HashSet::new();
    for (t, v) in window {
        if t.len() != arity {
            return Err(CloneError::BadWindow("tuples of different lengths".into()));
        }
        if t.iter().chain(Some(v)).any(|&x| x as usize >= base) {
            return Err(CloneError::BadWindow(format!("{t:?} -> {v} leaves the base")));
        }
        if !seen.insert(t) {
            return Err(CloneError::BadWindow(format!("tuple {t:?} listed twice")));
        }
    }
    Ok(Some(arity))
}

/// Decides `f ∈ C`.
pub fn contains(spec: &CloneSpec, f: &OpTable) -> Result<Membership, CloneError> {
    if let CloneSpec::Generated { arity_bound, .. } = spec {
        if f.arity() > *arity_bound {
            return Ok(Membership::Undecided);
        }
    }
    spec.resolve()?.contains(f)
}

/// Decides whether some member agrees with the partial function `window`.
pub fn interpolates(
    spec: &CloneSpec,
    window: &[(Vec<u8>, u8)],
) -> Result<Interpolation, CloneError> {
    if let (CloneSpec::Generated { arity_bound, .. }, Some((t, _))) = (spec, window.first()) {
        if t.len() > *arity_bound {
            return Ok(Interpolation::Undecided);
        }
    }
    spec.resolve()?.interpolates(window)
}

/// `f[A^n] ⊆ A`.
pub fn pol_member(subset: Subset, f: &OpTable) -> bool {
    Predicate::Preserves {
        base: f.base(),
        subset,
    }
    .contains(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeqMode {
    Exhaustive { budget: u64 },
    Sampled { samples: usize, seed: u64 },
}

/// Tests `C1 ⊆ C2` on operations of arity `1..=arity`.
pub fn clone_leq_upto(
    c1: &CloneSpec,
    c2: &CloneSpec,
    arity: usize,
    mode: LeqMode,
) -> Result<bool, CloneError> {
    if c1.base() != c2.base() {
        return Err(CloneError::BaseMismatch(c1.base(), c2.base()));
    }
    let r1 = c1.resolve()?;
    let r2 = c2.resolve()?;
    let check = |f: &OpTable| -> Result<bool, CloneError> {
        match r2.contains(f)? {
            Membership::Member(_) => Ok(true),
            Membership::NonMember => Ok(false),
            Membership::Undecided => Err(CloneError::Undecided),
        }
    };
    match mode {
        LeqMode::Exhaustive { budget } => {
            if let ResolvedClone::Predicate(p) = &r1 {
                let needed: u128 = (1..=arity).map(|k| p.count(k)).fold(0, u128::saturating_add);
                if needed > budget as u128 {
                    return Err(CloneError::Infeasible { needed, budget });
                }
            }
            for k in 1..=arity {
                for f in r1.members(k, budget)? {
                    if !check(&f)? {
                        return Ok(false);
                    }
                }
            }
        }
        LeqMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for k in 1..=arity {
                for _ in 0..samples {
                    if !check(&r1.sample(k, &mut rng)?)? {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}
