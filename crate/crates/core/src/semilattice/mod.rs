//! Finite join-semilattices with a least element, their congruences and
//! congruence orders, and the clones `E(⊑)` of operations bounded by the
//! join of their arguments.

mod chain;
mod congruence;
pub mod corpus;
mod eclone;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use chain::{interval_partition_to_set, interval_partitions, set_to_interval_partition};
pub use congruence::{congruence_to_order, enumerate_congruences, order_to_congruence};
pub use eclone::{
    chi, e_interpolate, e_member, e_member_via_pol, least_congruence_order,
    order_of_unary_generators, EInterpolation,
};

use crate::ops::{OpError, OpTable, MAX_BASE};

/// Default size limit for brute-force congruence enumeration.
pub const DEFAULT_ENUMERATION_BOUND: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemilatticeError {
    #[error(transparent)]
    Op(#[from] OpError),
    #[error("join table must be binary")]
    NotBinary,
    #[error("join is not idempotent at {0}")]
    NotIdempotent(usize),
    #[error("join is not commutative at ({0}, {1})")]
    NotCommutative(usize, usize),
    #[error("join is not associative at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("0 is not the least element: 0 v {0} != {0}")]
    NoLeastZero(usize),
    #[error("relation has size {got}, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("not a congruence order: {0}")]
    NotCongruenceOrder(String),
    #[error("not a congruence: {0}")]
    NotCongruence(String),
    #[error("semilattice of size {size} exceeds the enumeration bound {bound}")]
    TooLarge { size: usize, bound: usize },
    #[error("partition classes are not intervals: {0}")]
    NotInterval(String),
    #[error("cut point {0} is outside [0, {1})")]
    CutOutOfRange(usize, usize),
    #[error("{b} is not below {d} in the congruence order; the operation is not in E(⊑)")]
    NotBelow { b: usize, d: usize },
    #[error("interpolation tuples must be distinct and of the operation's arity")]
    BadTuples,
}

/// A finite join-semilattice on `{0, .., q-1}` whose least element is `0`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSemilattice", into = "RawSemilattice")]
pub struct Semilattice {
    join: OpTable,
}

#[derive(Serialize, Deserialize)]
struct RawSemilattice {
    join: Vec<Vec<u8>>,
}

impl TryFrom<RawSemilattice> for Semilattice {
    type Error = SemilatticeError;

    fn try_from(raw: RawSemilattice) -> Result<Self, Self::Error> {
        Semilattice::from_matrix(raw.join)
    }
}

impl From<Semilattice> for RawSemilattice {
    fn from(s: Semilattice) -> Self {
        let q = s.size();
        RawSemilattice {
            join: s.join.table().chunks(q).map(<[u8]>::to_vec).collect(),
        }
    }
}

impl Semilattice {
    /// Validates the join laws and that `0` is least.
    pub fn new(join: OpTable) -> Result<Self, SemilatticeError> {
        if join.arity() != 2 {
            return Err(SemilatticeError::NotBinary);
        }
        let q = join.base();
        let j = |a: usize, b: usize| join.table()[a * q + b] as usize;
        for a in 0..q {
            if j(a, a) != a {
                return Err(SemilatticeError::NotIdempotent(a));
            }
            if j(0, a) != a {
                return Err(SemilatticeError::NoLeastZero(a));
            }
            for b in 0..q {
                if j(a, b) != j(b, a) {
                    return Err(SemilatticeError::NotCommutative(a, b));
                }
                for c in 0..q {
                    if j(j(a, b), c) != j(a, j(b, c)) {
                        return Err(SemilatticeError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        Ok(Semilattice { join })
    }

    pub fn from_matrix(rows: Vec<Vec<u8>>) -> Result<Self, SemilatticeError> {
        let q = rows.len();
        if rows.iter().any(|r| r.len() != q) {
            return Err(SemilatticeError::NotBinary);
        }
        Semilattice::new(OpTable::new(q, 2, rows.concat())?)
    }

    /// The chain `0 < 1 < .. < n-1` under `max`.
    pub fn chain(n: usize) -> Result<Self, SemilatticeError> {
        Semilattice::new(OpTable::from_fn(n, 2, |t| t[0].max(t[1]))?)
    }

    pub fn size(&self) -> usize {
        self.join.base()
    }

    pub fn join_table(&self) -> &OpTable {
        &self.join
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join.table()[a * self.size() + b] as usize
    }

    /// `x1 ∨ .. ∨ xk`.
    pub fn join_all(&self, xs: &[u8]) -> u8 {
        xs.iter()
            .fold(0usize, |acc, &x| self.join(acc, x as usize)) as u8
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.join(a, b) == b
    }

    /// The order `≤` as a relation.
    pub fn order(&self) -> Relation {
        Relation::from_fn(self.size(), |a, b| self.leq(a, b))
    }
}

impl fmt::Debug for Semilattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Semilattice({:?})", self.join.table())
    }
}

/// A binary relation on `{0, .., q-1}`, one bitmask row per element.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRelation", into = "RawRelation")]
pub struct Relation {
    size: usize,
    rows: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawRelation {
    size: usize,
    matrix: Vec<Vec<u8>>,
}

impl TryFrom<RawRelation> for Relation {
    type Error = SemilatticeError;

    fn try_from(raw: RawRelation) -> Result<Self, Self::Error> {
        if raw.size == 0 || raw.size > MAX_BASE {
            return Err(OpError::BadBase(raw.size).into());
        }
        if raw.matrix.len() != raw.size || raw.matrix.iter().any(|r| r.len() != raw.size) {
            return Err(SemilatticeError::SizeMismatch {
                expected: raw.size,
                got: raw.matrix.len(),
            });
        }
        Ok(Relation::from_fn(raw.size, |a, b| raw.matrix[a][b] != 0))
    }
}

impl From<Relation> for RawRelation {
    fn from(r: Relation) -> Self {
        RawRelation {
            size: r.size,
            matrix: (0..r.size)
                .map(|a| (0..r.size).map(|b| r.holds(a, b) as u8).collect())
                .collect(),
        }
    }
}

impl Relation {
    pub fn empty(size: usize) -> Self {
        Relation {
            size,
            rows: vec![0; size],
        }
    }

    pub fn from_fn(size: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut r = Relation::empty(size);
        for a in 0..size {
            for b in 0..size {
                if f(a, b) {
                    r.insert(a, b);
                }
            }
        }
        r
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn holds(&self, a: usize, b: usize) -> bool {
        self.rows[a] >> b & 1 == 1
    }

    /// Adds a pair; returns `true` if it was new.
    pub fn insert(&mut self, a: usize, b: usize) -> bool {
        let before = self.rows[a];
        self.rows[a] |= 1 << b;
        before != self.rows[a]
    }

    /// The set `{b : a R b}` as a bitmask.
    pub fn row(&self, a: usize) -> u64 {
        self.rows[a]
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.rows.iter().zip(&other.rows).all(|(a, b)| a & !b == 0)
    }

    pub fn pair_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }

    /// Closes under transitivity (Warshall on bit rows).
    pub fn transitive_closure(&mut self) {
        for k in 0..self.size {
            let rk = self.rows[k];
            for a in 0..self.size {
                if self.rows[a] >> k & 1 == 1 {
                    self.rows[a] |= rk;
                }
            }
        }
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<(usize, usize)> = (0..self.size)
            .flat_map(|a| (0..self.size).map(move |b| (a, b)))
            .filter(|&(a, b)| self.holds(a, b))
            .collect();
        write!(f, "Relation{pairs:?}")
    }
}

/// A reflexive transitive relation containing `≤` and closed under
/// `x ⊑ z, y ⊑ z  ⇒  x ∨ y ⊑ z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct CongruenceOrder(Relation);

impl CongruenceOrder {
    pub fn new(s: &Semilattice, rel: Relation) -> Result<Self, SemilatticeError> {
        let q = s.size();
        if rel.size() != q {
            return Err(SemilatticeError::SizeMismatch {
                expected: q,
                got: rel.size(),
            });
        }
        for a in 0..q {
            for b in 0..q {
                if s.leq(a, b) && !rel.holds(a, b) {
                    return Err(SemilatticeError::NotCongruenceOrder(format!(
                        "{a} <= {b} but not related"
                    )));
                }
                if !rel.holds(a, b) {
                    continue;
                }
                for c in 0..q {
                    if rel.holds(b, c) && !rel.holds(a, c) {
                        return Err(SemilatticeError::NotCongruenceOrder(format!(
                            "not transitive at ({a}, {b}, {c})"
                        )));
                    }
                    if rel.holds(c, b) && !rel.holds(s.join(a, c), b) {
                        return Err(SemilatticeError::NotCongruenceOrder(format!(
                            "join rule fails for {a}, {c} below {b}"
                        )));
                    }
                }
            }
        }
        Ok(CongruenceOrder(rel))
    }

    pub(crate) fn new_unchecked(rel: Relation) -> Self {
        CongruenceOrder(rel)
    }

    /// The semilattice order itself, the least congruence order.
    pub fn order_of(s: &Semilattice) -> Self {
        CongruenceOrder(s.order())
    }

    pub fn holds(&self, a: usize, b: usize) -> bool {
        self.0.holds(a, b)
    }

    pub fn relation(&self) -> &Relation {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.size()
    }
}

/// A partition of `{0, .., q-1}` into classes, labelled in order of first
/// occurrence.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Congruence {
    classes: Vec<usize>,
}

impl Congruence {
    /// Wraps a class labelling after checking compatibility with the join.
    pub fn new(s: &Semilattice, labels: &[usize]) -> Result<Self, SemilatticeError> {
        let c = Congruence::from_labels(labels);
        if c.size() != s.size() {
            return Err(SemilatticeError::SizeMismatch {
                expected: s.size(),
                got: c.size(),
            });
        }
        if let Some((a, b, x)) = c.compatibility_violation(s) {
            return Err(SemilatticeError::NotCongruence(format!(
                "{a} ~ {b} but {a} v {x} and {b} v {x} are separated"
            )));
        }
        Ok(c)
    }

    /// Canonical relabelling of an arbitrary partition, no checks.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let classes = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Congruence { classes }
    }

    pub fn discrete(q: usize) -> Self {
        Congruence {
            classes: (0..q).collect(),
        }
    }

    pub fn total(q: usize) -> Self {
        Congruence {
            classes: vec![0; q],
        }
    }

    pub fn size(&self) -> usize {
        self.classes.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.iter().max().map_or(0, |m| m + 1)
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.classes[a] == self.classes[b]
    }

    /// Classes as sorted element lists, in label order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.class_count()];
        for (x, &c) in self.classes.iter().enumerate() {
            blocks[c].push(x);
        }
        blocks
    }

    /// Whether every class of `self` lies inside a class of `other`.
    pub fn refines(&self, other: &Congruence) -> bool {
        (0..self.size()).all(|a| {
            (0..self.size()).all(|b| !self.related(a, b) || other.related(a, b))
        })
    }

    pub(crate) fn compatibility_violation(&self, s: &Semilattice) -> Option<(usize, usize, usize)> {
        let q = self.size();
        for a in 0..q {
            for b in a + 1..q {
                if !self.related(a, b) {
                    continue;
                }
                for x in 0..q {
                    if !self.related(s.join(a, x), s.join(b, x)) {
                        return Some((a, b, x));
                    }
                }
            }
        }
        None
    }

    /// Least congruence containing both: union, transitive closure, then
    /// compatibility closure until stable.
    pub fn join(&self, other: &Congruence, s: &Semilattice) -> Congruence {
        let q = self.size();
        let mut rel = Relation::from_fn(q, |a, b| self.related(a, b) || other.related(a, b));
        loop {
            rel.transitive_closure();
            let mut changed = false;
            for a in 0..q {
                for b in 0..q {
                    if !rel.holds(a, b) {
                        continue;
                    }
                    for x in 0..q {
                        changed |= rel.insert(s.join(a, x), s.join(b, x));
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let labels: Vec<usize> = (0..q)
            .map(|a| (0..q).find(|&b| rel.holds(a, b)).expect("reflexive"))
            .collect();
        Congruence::from_labels(&labels)
    }

    pub fn meet(&self, other: &Congruence) -> Congruence {
        let labels: Vec<usize> = self
            .classes
            .iter()
            .zip(&other.classes)
            .map(|(a, b)| a * self.size() + b)
            .collect();
        Congruence::from_labels(&labels)
    }
}

impl fmt::Debug for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in self.blocks() {
            let items: Vec<String> = block.iter().map(usize::to_string).collect();
            write!(f, "{{{}}}", items.join(","))?;
        }
        Ok(())
    }
}
