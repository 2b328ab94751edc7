use std::collections::HashMap;

use serde::Serialize;

use super::CloneError;
use crate::ops::{projection, CompositionTree, OpTable};

/// How an operation of a [`ClosureResult`] was first reached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Derivation {
    /// The projection onto coordinate `index` (1-based).
    Projection { index: usize },
    /// Generator `generator` applied to earlier operations of the same arity,
    /// named by their position in the layer.
    Apply { generator: usize, args: Vec<usize> },
}

#[derive(Debug, Clone)]
struct Layer {
    ops: Vec<OpTable>,
    index: HashMap<Vec<u8>, usize>,
    derivations: Vec<Derivation>,
    saturated: bool,
}

impl Layer {
    fn new() -> Self {
        Layer {
            ops: Vec::new(),
            index: HashMap::new(),
            derivations: Vec::new(),
            saturated: false,
        }
    }
}

/// Note attached to every closure export.
pub const CLOSURE_NOTE: &str = "n-ary layers are the subuniverses of the n-ary term tables generated \
by the projections; each saturated layer is exactly the n-ary part of the generated clone. \
Arities above the bound are not computed.";

/// The operations of arity `1..=arity_bound` in the clone generated by a
/// list of tables, each with a derivation over the generators.
#[derive(Debug, Clone)]
pub struct ClosureResult {
    base: usize,
    arity_bound: usize,
    generators: Vec<OpTable>,
    layers: Vec<Layer>,
}

impl ClosureResult {
    pub fn base(&self) -> usize {
        self.base
    }

    pub fn arity_bound(&self) -> usize {
        self.arity_bound
    }

    pub fn generators(&self) -> &[OpTable] {
        &self.generators
    }

    /// Total number of operations over all computed arities.
    pub fn len(&self) -> usize {
        self.layers.iter().map(|l| l.ops.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Operations of the given arity in discovery order.
    pub fn ops(&self, arity: usize) -> &[OpTable] {
        self.layer(arity).map_or(&[], |l| l.ops.as_slice())
    }

    /// Whether the layer of this arity reached its fixpoint.
    pub fn saturated(&self, arity: usize) -> bool {
        self.layer(arity).is_some_and(|l| l.saturated)
    }

    pub fn is_saturated(&self) -> bool {
        self.layers.len() == self.arity_bound && self.layers.iter().all(|l| l.saturated)
    }

    pub fn iter(&self) -> impl Iterator<Item = &OpTable> {
        self.layers.iter().flat_map(|l| l.ops.iter())
    }

    pub fn contains_op(&self, f: &OpTable) -> bool {
        self.position(f).is_some()
    }

    /// The derivation tree of `f` over [`Self::generators`], if `f` was reached.
    pub fn tree_of(&self, f: &OpTable) -> Option<CompositionTree> {
        self.position(f).map(|i| self.tree(f.arity(), i))
    }

    fn layer(&self, arity: usize) -> Option<&Layer> {
        arity.checked_sub(1).and_then(|i| self.layers.get(i))
    }

    fn position(&self, f: &OpTable) -> Option<usize> {
        if f.base() != self.base {
            return None;
        }
        self.layer(f.arity())?.index.get(f.table()).copied()
    }

    fn tree(&self, arity: usize, i: usize) -> CompositionTree {
        match &self.layers[arity - 1].derivations[i] {
            Derivation::Projection { index } => CompositionTree::proj(arity, *index),
            Derivation::Apply { generator, args } => CompositionTree::apply(
                *generator,
                args.iter().map(|&a| self.tree(arity, a)).collect(),
            ),
        }
    }

    /// Serializable view: every operation with its derivation tree.
    pub fn export(&self) -> ClosureExport {
        ClosureExport {
            base: self.base,
            arity_bound: self.arity_bound,
            note: CLOSURE_NOTE,
            generators: self.generators.clone(),
            layers: self
                .layers
                .iter()
                .enumerate()
                .map(|(i, l)| LayerExport {
                    arity: i + 1,
                    saturated: l.saturated,
                    ops: l
                        .ops
                        .iter()
                        .enumerate()
                        .map(|(j, op)| OpExport {
                            table: op.table().to_vec(),
                            tree: self.tree(i + 1, j),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureExport {
    pub base: usize,
    pub arity_bound: usize,
    pub note: &'static str,
    pub generators: Vec<OpTable>,
    pub layers: Vec<LayerExport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LayerExport {
    pub arity: usize,
    pub saturated: bool,
    pub ops: Vec<OpExport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OpExport {
    pub table: Vec<u8>,
    pub tree: CompositionTree,
}

/// Computes all operations of arity `1..=arity_bound` generated by `generators`.
///
/// For each arity `n` the layer starts from the `n` projections and is closed
/// under applying every generator pointwise to tuples of layer members.
/// Rounds are semi-naive: a round only applies generators to tuples that
/// involve at least one operation found in the previous round. Discovery
/// order, and hence every derivation, is deterministic.
///
/// If the total number of operations exceeds `size_bound`, the search stops
/// and the error carries the partial result with the unfinished layers
/// marked unsaturated.
pub fn generate_clone(
    generators: &[OpTable],
    base: usize,
    arity_bound: usize,
    size_bound: usize,
) -> Result<ClosureResult, CloneError> {
    if arity_bound == 0 || size_bound == 0 {
        return Err(CloneError::BadBounds);
    }
    if let Some(g) = generators.iter().find(|g| g.base() != base) {
        return Err(CloneError::BaseMismatch(base, g.base()));
    }
    crate::ops::table_len(base, arity_bound)?;

    let mut result = ClosureResult {
        base,
        arity_bound,
        generators: generators.to_vec(),
        layers: Vec::with_capacity(arity_bound),
    };
    let mut total = 0usize;
    for n in 1..=arity_bound {
        let mut layer = Layer::new();
        let exceeded = close_layer(&mut layer, generators, base, n, size_bound - total.min(size_bound))?;
        total += layer.ops.len();
        result.layers.push(layer);
        if exceeded {
            return Err(CloneError::SizeBoundExceeded {
                bound: size_bound,
                partial: Box::new(result),
            });
        }
    }
    Ok(result)
}

/// Fills one layer; returns `true` if `budget` ran out first.
fn close_layer(
    layer: &mut Layer,
    generators: &[OpTable],
    base: usize,
    n: usize,
    budget: usize,
) -> Result<bool, CloneError> {
    let push = |layer: &mut Layer, table: Vec<u8>, d: Derivation| -> bool {
        if layer.index.contains_key(&table) {
            return true;
        }
        if layer.ops.len() >= budget {
            return false;
        }
        let op = OpTable::new(base, n, table.clone()).expect("closure tables are well formed");
        layer.index.insert(table, layer.ops.len());
        layer.ops.push(op);
        layer.derivations.push(d);
        true
    };

    for i in 1..=n {
        let p = projection(base, n, i)?;
        if !push(layer, p.into_table(), Derivation::Projection { index: i }) {
            return Ok(true);
        }
    }

    // Generators are added one at a time, by arity. One whose table (padded
    // with dummy variables) is already in the layer lies in the clone of the
    // generators added so far and is skipped.
    let mut order: Vec<usize> = (0..generators.len()).collect();
    order.sort_by_key(|&i| generators[i].arity());
    let mut active: Vec<usize> = Vec::new();
    let mut row = Vec::new();
    for gi in order {
        let g = &generators[gi];
        let k = g.arity();
        if k <= n {
            let args: Vec<usize> = (0..k).collect();
            apply_rows(g, &args, &layer.ops, &mut row);
            if layer.index.contains_key(&row) {
                continue;
            }
        }
        active.push(gi);
        let end = layer.ops.len();
        if !apply_all(layer, generators, gi, 0, end, &push, &mut row)? {
            return Ok(true);
        }
        let mut start = end;
        while start < layer.ops.len() {
            let end = layer.ops.len();
            for &ai in &active {
                if !apply_all(layer, generators, ai, start, end, &push, &mut row)? {
                    return Ok(true);
                }
            }
            start = end;
        }
    }
    layer.saturated = true;
    Ok(false)
}

/// Applies generator `gi` to every argument tuple over `0..end` with at
/// least one entry in `start..end`. Returns `false` if the budget ran out.
fn apply_all(
    layer: &mut Layer,
    generators: &[OpTable],
    gi: usize,
    start: usize,
    end: usize,
    push: &impl Fn(&mut Layer, Vec<u8>, Derivation) -> bool,
    row: &mut Vec<u8>,
) -> Result<bool, CloneError> {
    let g = &generators[gi];
    let k = g.arity();
    // position j holds the first argument drawn from the new range
    for j in 0..k {
        let ranges: Vec<(usize, usize)> = (0..k)
            .map(|p| match p.cmp(&j) {
                std::cmp::Ordering::Less => (0, start),
                std::cmp::Ordering::Equal => (start, end),
                std::cmp::Ordering::Greater => (0, end),
            })
            .collect();
        if ranges.iter().any(|r| r.0 >= r.1) {
            continue;
        }
        let mut args: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        loop {
            apply_rows(g, &args, &layer.ops, row);
            if !layer.index.contains_key(row.as_slice()) {
                let d = Derivation::Apply {
                    generator: gi,
                    args: args.clone(),
                };
                if !push(layer, row.clone(), d) {
                    return Ok(false);
                }
            }
            if !next_tuple(&mut args, &ranges) {
                break;
            }
        }
    }
    Ok(true)
}

fn apply_rows(g: &OpTable, args: &[usize], ops: &[OpTable], out: &mut Vec<u8>) {
    let q = g.base();
    let cols: Vec<&[u8]> = args.iter().map(|&a| ops[a].table()).collect();
    let len = cols[0].len();
    let table = g.table();
    out.clear();
    out.extend((0..len).map(|r| {
        let idx = cols.iter().fold(0usize, |acc, col| acc * q + col[r] as usize);
        table[idx]
    }));
}

fn next_tuple(args: &mut [usize], ranges: &[(usize, usize)]) -> bool {
    if ranges.iter().any(|r| r.0 >= r.1) {
        return false;
    }
    for p in (0..args.len()).rev() {
        args[p] += 1;
        if args[p] < ranges[p].1 {
            return true;
        }
        args[p] = ranges[p].0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{evaluate_tree, tuples};

    fn binary(q: usize, f: impl Fn(u8, u8) -> u8) -> OpTable {
        OpTable::from_fn(q, 2, |t| f(t[0], t[1])).unwrap()
    }

    #[test]
    fn projections_only() {
        let c = generate_clone(&[], 2, 2, 100).unwrap();
        assert_eq!(c.ops(1).len(), 1);
        assert_eq!(c.ops(2).len(), 2);
        assert!(c.is_saturated());
    }

    #[test]
    fn one_element_base_dedupes_projections() {
        let c = generate_clone(&[], 1, 3, 100).unwrap();
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn max_on_two_elements() {
        let max = binary(2, |a, b| a.max(b));
        let c = generate_clone(std::slice::from_ref(&max), 2, 2, 100).unwrap();
        // x, y, max(x, y)
        assert_eq!(c.ops(2).len(), 3);
        assert!(c.contains_op(&max));
        assert!(!c.contains_op(&binary(2, |a, b| a.min(b))));
        for op in c.iter() {
            let t = c.tree_of(op).unwrap();
            assert_eq!(&evaluate_tree(&t, c.generators()).unwrap(), op);
        }
    }

    #[test]
    fn idempotent_binaries_on_two_elements() {
        let gens: Vec<OpTable> = tuples(2, 4)
            .map(|t| OpTable::new(2, 2, t).unwrap())
            .filter(OpTable::is_idempotent)
            .collect();
        assert_eq!(gens.len(), 4);
        let c = generate_clone(&gens, 2, 2, 100).unwrap();
        assert_eq!(c.ops(1).len(), 1);
        assert_eq!(c.ops(2).len(), 4);
    }

    #[test]
    fn size_bound_aborts_with_partial() {
        let not = OpTable::new(2, 1, vec![1, 0]).unwrap();
        let nand = binary(2, |a, b| 1 - (a & b));
        match generate_clone(&[not, nand], 2, 3, 20) {
            Err(CloneError::SizeBoundExceeded { bound, partial }) => {
                assert_eq!(bound, 20);
                assert!(partial.len() <= 20);
                assert!(!partial.is_saturated());
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn rejects_mixed_bases() {
        let a = OpTable::identity(2).unwrap();
        assert!(matches!(
            generate_clone(&[a], 3, 2, 10),
            Err(CloneError::BaseMismatch(3, 2))
        ));
        assert!(matches!(generate_clone(&[], 2, 0, 10), Err(CloneError::BadBounds)));
    }

    #[test]
    fn export_round_trips_trees() {
        let c = generate_clone(&[binary(2, |a, b| a & b)], 2, 2, 100).unwrap();
        let json = serde_json::to_value(c.export()).unwrap();
        assert_eq!(json["layers"][1]["ops"].as_array().unwrap().len(), 3);
        assert_eq!(json["layers"][1]["saturated"], true);
    }
}
