//! Finite operation tables.
//!
//! An [`OpTable`] is a total `k`-ary operation on the base set `{0, .., q-1}`,
//! stored as a flat value table of length `q^k`. Tuples are indexed in
//! row-major order with the first coordinate most significant, so the tuple
//! `(x1, .., xk)` lives at `x1*q^(k-1) + .. + xk`. Every module in this crate
//! relies on that encoding.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported base size. Subsets of the base are `u64` bitmasks.
pub const MAX_BASE: usize = 64;

/// Upper limit on the number of entries of a single table.
pub const MAX_TABLE_LEN: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpError {
    #[error("base size {0} is outside 1..={MAX_BASE}")]
    BadBase(usize),
    #[error("arity must be at least 1")]
    ZeroArity,
    #[error("table for base {base} and arity {arity} exceeds {MAX_TABLE_LEN} entries")]
    TooLarge { base: usize, arity: usize },
    #[error("table has length {got}, expected {expected}")]
    BadLength { expected: usize, got: usize },
    #[error("table entry {value} at index {index} is not below the base size {base}")]
    EntryOutOfRange { index: usize, value: u8, base: usize },
    #[error("projection index {index} is outside 1..={arity}")]
    ProjectionIndex { arity: usize, index: usize },
    #[error("base sizes differ: {0} vs {1}")]
    BaseMismatch(usize, usize),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("generator index {0} is out of range")]
    GeneratorIndex(usize),
    #[error("malformed composition tree: {0}")]
    MalformedTree(String),
}

/// A subset of a finite base `{0, .., q-1}` stored as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn from_bits(bits: u64) -> Self {
        Subset(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// The whole base `{0, .., q-1}`.
    pub fn full(q: usize) -> Self {
        debug_assert!(q <= MAX_BASE);
        if q == 64 {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << q) - 1)
        }
    }

    pub fn singleton(x: usize) -> Self {
        Subset(1u64 << x)
    }

    pub fn contains(self, x: usize) -> bool {
        x < 64 && self.0 >> x & 1 == 1
    }

    pub fn insert(&mut self, x: usize) {
        self.0 |= 1u64 << x;
    }

    pub fn with(self, x: usize) -> Self {
        Subset(self.0 | 1u64 << x)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Subset) -> Self {
        Subset(self.0 | other.0)
    }

    pub fn intersection(self, other: Subset) -> Self {
        Subset(self.0 & other.0)
    }

    pub fn difference(self, other: Subset) -> Self {
        Subset(self.0 & !other.0)
    }

    pub fn complement(self, q: usize) -> Self {
        Subset(!self.0 & Subset::full(q).0)
    }

    /// Smallest element, if any.
    pub fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let x = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(x)
        })
    }

    /// All subsets of `self`, in increasing bitmask order.
    pub fn subsets(self) -> impl Iterator<Item = Subset> {
        let mask = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(Subset(cur))
        })
    }
}

impl FromIterator<usize> for Subset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = Subset::EMPTY;
        for x in iter {
            s.insert(x);
        }
        s
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for Subset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for Subset {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let items = Vec::<usize>::deserialize(d)?;
        if let Some(bad) = items.iter().find(|&&x| x >= MAX_BASE) {
            return Err(serde::de::Error::custom(format!(
                "subset element {bad} exceeds the maximum base size"
            )));
        }
        Ok(items.into_iter().collect())
    }
}

/// A total finitary operation on `{0, .., base-1}`.
///
/// Equality is equality of `(base, arity, table)`; there is no quotienting.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawOpTable", into = "RawOpTable")]
pub struct OpTable {
    base: usize,
    arity: usize,
    table: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct RawOpTable {
    base: usize,
    arity: usize,
    table: Vec<u8>,
}

impl TryFrom<RawOpTable> for OpTable {
    type Error = OpError;

    fn try_from(raw: RawOpTable) -> Result<Self, OpError> {
        OpTable::new(raw.base, raw.arity, raw.table)
    }
}

impl From<OpTable> for RawOpTable {
    fn from(op: OpTable) -> Self {
        RawOpTable {
            base: op.base,
            arity: op.arity,
            table: op.table,
        }
    }
}

/// Number of entries `q^k` of a table, checked against [`MAX_TABLE_LEN`].
pub fn table_len(base: usize, arity: usize) -> Result<usize, OpError> {
    if base == 0 || base > MAX_BASE {
        return Err(OpError::BadBase(base));
    }
    if arity == 0 {
        return Err(OpError::ZeroArity);
    }
    u32::try_from(arity)
        .ok()
        .and_then(|k| base.checked_pow(k))
        .filter(|&n| n <= MAX_TABLE_LEN)
        .ok_or(OpError::TooLarge { base, arity })
}

impl OpTable {
    pub fn new(base: usize, arity: usize, table: Vec<u8>) -> Result<Self, OpError> {
        let expected = table_len(base, arity)?;
        if table.len() != expected {
            return Err(OpError::BadLength {
                expected,
                got: table.len(),
            });
        }
        if let Some((index, &value)) = table
            .iter()
            .enumerate()
            .find(|(_, &v)| v as usize >= base)
        {
            return Err(OpError::EntryOutOfRange { index, value, base });
        }
        Ok(OpTable { base, arity, table })
    }

    /// Builds a table by evaluating `f` on every tuple in row-major order.
    pub fn from_fn(
        base: usize,
        arity: usize,
        mut f: impl FnMut(&[u8]) -> u8,
    ) -> Result<Self, OpError> {
        let len = table_len(base, arity)?;
        let mut table = Vec::with_capacity(len);
        let mut tuple = vec![0u8; arity];
        for _ in 0..len {
            table.push(f(&tuple));
            advance(&mut tuple, base);
        }
        OpTable::new(base, arity, table)
    }

    pub fn identity(base: usize) -> Result<Self, OpError> {
        projection(base, 1, 1)
    }

    /// The unary constant map with value `c`.
    pub fn constant(base: usize, c: u8) -> Result<Self, OpError> {
        OpTable::new(base, 1, vec![c; table_len(base, 1)?])
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    pub fn into_table(self) -> Vec<u8> {
        self.table
    }

    pub fn index_of(&self, tuple: &[u8]) -> usize {
        debug_assert_eq!(tuple.len(), self.arity);
        tuple
            .iter()
            .fold(0usize, |acc, &x| acc * self.base + x as usize)
    }

    /// Value at a tuple. Panics if the tuple has the wrong length or
    /// coordinates outside the base.
    pub fn eval(&self, tuple: &[u8]) -> u8 {
        assert_eq!(tuple.len(), self.arity, "tuple length differs from arity");
        assert!(
            tuple.iter().all(|&x| (x as usize) < self.base),
            "tuple coordinate outside the base"
        );
        self.table[self.index_of(tuple)]
    }

    /// Decodes a row-major index into its tuple.
    pub fn tuple_at(&self, mut index: usize) -> Vec<u8> {
        let mut tuple = vec![0u8; self.arity];
        for slot in tuple.iter_mut().rev() {
            *slot = (index % self.base) as u8;
            index /= self.base;
        }
        tuple
    }

    /// Iterates `(tuple, value)` pairs in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<u8>, u8)> + '_ {
        tuples(self.base, self.arity).zip(self.table.iter().copied())
    }

    /// Returns a copy with the value at `tuple` replaced.
    pub fn with_value(&self, tuple: &[u8], value: u8) -> Result<Self, OpError> {
        if value as usize >= self.base {
            return Err(OpError::EntryOutOfRange {
                index: self.index_of(tuple),
                value,
                base: self.base,
            });
        }
        let mut table = self.table.clone();
        table[self.index_of(tuple)] = value;
        Ok(OpTable { table, ..*self })
    }

    pub fn is_idempotent(&self) -> bool {
        fix_set(self) == Subset::full(self.base)
    }
}

impl fmt::Debug for OpTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OpTable(q={}, k={}, {:?})", self.base, self.arity, self.table)
    }
}

fn advance(tuple: &mut [u8], base: usize) {
    for slot in tuple.iter_mut().rev() {
        *slot += 1;
        if (*slot as usize) < base {
            return;
        }
        *slot = 0;
    }
}

/// All `arity`-tuples over `{0, .., base-1}` in row-major order.
pub fn tuples(base: usize, arity: usize) -> impl Iterator<Item = Vec<u8>> {
    let total = u32::try_from(arity)
        .ok()
        .and_then(|k| base.checked_pow(k))
        .unwrap_or(0);
    let mut tuple = vec![0u8; arity];
    (0..total).map(move |_| {
        let out = tuple.clone();
        advance(&mut tuple, base);
        out
    })
}

/// The projection `(x1, .., xn) -> xi`; `index` is 1-based.
pub fn projection(base: usize, arity: usize, index: usize) -> Result<OpTable, OpError> {
    if index == 0 || index > arity {
        return Err(OpError::ProjectionIndex { arity, index });
    }
    OpTable::from_fn(base, arity, |t| t[index - 1])
}

/// `h(x) = f(g1(x), .., gk(x))`.
pub fn compose(f: &OpTable, gs: &[OpTable]) -> Result<OpTable, OpError> {
    if gs.len() != f.arity {
        return Err(OpError::ArityMismatch {
            expected: f.arity,
            got: gs.len(),
        });
    }
    let n = gs[0].arity;
    for g in gs {
        if g.base != f.base {
            return Err(OpError::BaseMismatch(f.base, g.base));
        }
        if g.arity != n {
            return Err(OpError::ArityMismatch {
                expected: n,
                got: g.arity,
            });
        }
    }
    Ok(compose_unchecked(f, n, gs.iter().map(|g| g.table.as_slice())))
}

/// Composition over raw argument tables that are already known to share the
/// base and arity of the result. Used by the closure inner loop.
pub(crate) fn compose_rows<'a>(
    f: &OpTable,
    args: impl ExactSizeIterator<Item = &'a [u8]> + Clone,
    out: &mut Vec<u8>,
) {
    let q = f.base;
    let len = args.clone().next().map_or(0, <[u8]>::len);
    out.clear();
    out.extend((0..len).map(|r| {
        let idx = args
            .clone()
            .fold(0usize, |acc, col| acc * q + col[r] as usize);
        f.table[idx]
    }));
}

fn compose_unchecked<'a>(
    f: &OpTable,
    arity: usize,
    args: impl ExactSizeIterator<Item = &'a [u8]> + Clone,
) -> OpTable {
    let mut table = Vec::new();
    compose_rows(f, args, &mut table);
    OpTable {
        base: f.base,
        arity,
        table,
    }
}

/// The diagonal `x -> f(x, .., x)`.
pub fn diagonal(f: &OpTable) -> OpTable {
    let q = f.base;
    // index of (x, .., x) is x * (q^(k-1) + .. + 1)
    let stride: usize = (0..f.arity).map(|i| q.pow(i as u32)).sum();
    OpTable {
        base: q,
        arity: 1,
        table: (0..q).map(|x| f.table[x * stride]).collect(),
    }
}

/// Points fixed by the diagonal of `f`.
pub fn fix_set(f: &OpTable) -> Subset {
    diagonal(f)
        .table
        .iter()
        .enumerate()
        .filter(|&(x, &v)| x == v as usize)
        .map(|(x, _)| x)
        .collect()
}

/// Points moved by the diagonal of `f`; the complement of [`fix_set`].
pub fn nix_set(f: &OpTable) -> Subset {
    fix_set(f).complement(f.base)
}

/// A term over a list of generator tables.
///
/// `Generator { index }` denotes the generator itself at its own arity;
/// `Apply` substitutes the children (which share one arity) into the
/// generator `head`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompositionTree {
    Projection { arity: usize, index: usize },
    Generator { index: usize },
    Apply {
        head: usize,
        args: Vec<CompositionTree>,
    },
}

impl CompositionTree {
    pub fn proj(arity: usize, index: usize) -> Self {
        CompositionTree::Projection { arity, index }
    }

    pub fn apply(head: usize, args: Vec<CompositionTree>) -> Self {
        CompositionTree::Apply { head, args }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            CompositionTree::Apply { args, .. } => 1 + args.iter().map(Self::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Arity of the denoted operation, validating the tree on the way.
    pub fn arity(&self, generators: &[OpTable]) -> Result<usize, OpError> {
        match self {
            CompositionTree::Projection { arity, index } => {
                if *index == 0 || index > arity {
                    Err(OpError::ProjectionIndex {
                        arity: *arity,
                        index: *index,
                    })
                } else {
                    Ok(*arity)
                }
            }
            CompositionTree::Generator { index } => generators
                .get(*index)
                .map(OpTable::arity)
                .ok_or(OpError::GeneratorIndex(*index)),
            CompositionTree::Apply { head, args } => {
                let g = generators.get(*head).ok_or(OpError::GeneratorIndex(*head))?;
                if args.len() != g.arity {
                    return Err(OpError::MalformedTree(format!(
                        "generator {head} has arity {} but is applied to {} arguments",
                        g.arity,
                        args.len()
                    )));
                }
                let mut arity = None;
                for a in args {
                    let n = a.arity(generators)?;
                    match arity {
                        None => arity = Some(n),
                        Some(m) if m != n => {
                            return Err(OpError::MalformedTree(format!(
                                "children of generator {head} have arities {m} and {n}"
                            )))
                        }
                        _ => {}
                    }
                }
                Ok(arity.expect("generator arity is at least 1"))
            }
        }
    }

    /// Evaluates the term at one point, without building any tables.
    pub fn eval_at(&self, generators: &[OpTable], point: &[u8]) -> u8 {
        match self {
            CompositionTree::Projection { index, .. } => point[index - 1],
            CompositionTree::Generator { index } => generators[*index].eval(point),
            CompositionTree::Apply { head, args } => {
                let inner: Vec<u8> = args.iter().map(|a| a.eval_at(generators, point)).collect();
                generators[*head].eval(&inner)
            }
        }
    }
}

/// Evaluates a composition tree bottom-up into a table.
pub fn evaluate_tree(
    tree: &CompositionTree,
    generators: &[OpTable],
) -> Result<OpTable, OpError> {
    let base = match generators.first() {
        Some(g) => g.base,
        None => match tree {
            CompositionTree::Projection { .. } => {
                return Err(OpError::MalformedTree(
                    "cannot infer the base without generators; use evaluate_tree_on".into(),
                ))
            }
            _ => return Err(OpError::GeneratorIndex(0)),
        },
    };
    evaluate_tree_on(base, tree, generators)
}

/// Like [`evaluate_tree`] with an explicit base, so projection-only trees
/// over an empty generator list evaluate too.
pub fn evaluate_tree_on(
    base: usize,
    tree: &CompositionTree,
    generators: &[OpTable],
) -> Result<OpTable, OpError> {
    if let Some(g) = generators.iter().find(|g| g.base != base) {
        return Err(OpError::BaseMismatch(base, g.base));
    }
    tree.arity(generators)?;
    Ok(eval_tree(base, tree, generators))
}

fn eval_tree(base: usize, tree: &CompositionTree, generators: &[OpTable]) -> OpTable {
    match tree {
        CompositionTree::Projection { arity, index } => {
            projection(base, *arity, *index).expect("validated projection")
        }
        CompositionTree::Generator { index } => generators[*index].clone(),
        CompositionTree::Apply { head, args } => {
            let cols: Vec<OpTable> = args.iter().map(|a| eval_tree(base, a, generators)).collect();
            compose_unchecked(
                &generators[*head],
                cols[0].arity,
                cols.iter().map(|c| c.table.as_slice()),
            )
        }
    }
}

/// A composition tree together with the tables its leaves refer to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub generators: Vec<OpTable>,
    pub tree: CompositionTree,
}

impl Certificate {
    pub fn evaluate(&self, base: usize) -> Result<OpTable, OpError> {
        evaluate_tree_on(base, &self.tree, &self.generators)
    }

    /// Whether the tree evaluates exactly to `target`.
    pub fn certifies(&self, target: &OpTable) -> bool {
        self.evaluate(target.base()).is_ok_and(|op| &op == target)
    }
}
