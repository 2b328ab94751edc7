//! Hasse diagrams in Graphviz DOT.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DotError {
    #[error("nodes {0} and {1} are below each other but distinct")]
    NotAntisymmetric(usize, usize),
}

/// Cover pairs `(lower, upper)` of the strict part of `leq`, sorted.
pub fn hasse_covers(n: usize, leq: impl Fn(usize, usize) -> bool) -> Result<Vec<(usize, usize)>, DotError> {
    for i in 0..n {
        for j in i + 1..n {
            if leq(i, j) && leq(j, i) {
                return Err(DotError::NotAntisymmetric(i, j));
            }
        }
    }
    let lt = |i: usize, j: usize| i != j && leq(i, j);
    let mut covers = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if lt(i, j) && !(0..n).any(|k| lt(i, k) && lt(k, j)) {
                covers.push((i, j));
            }
        }
    }
    Ok(covers)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// The Hasse diagram of `leq` on `labels.len()` nodes, drawn bottom-up.
/// Node `i` is named `n{i}`.
pub fn emit_lattice_dot(
    name: &str,
    labels: &[String],
    leq: impl Fn(usize, usize) -> bool,
) -> Result<String, DotError> {
    let covers = hasse_covers(labels.len(), leq)?;
    let mut out = format!("digraph \"{}\" {{\n  rankdir=BT;\n  node [shape=box];\n", escape(name));
    for (i, l) in labels.iter().enumerate() {
        out.push_str(&format!("  n{i} [label=\"{}\"];\n", escape(l)));
    }
    for (a, b) in covers {
        out.push_str(&format!("  n{a} -> n{b};\n"));
    }
    out.push_str("}\n");
    Ok(out)
}

/// Node and edge counts of DOT text produced by [`emit_lattice_dot`].
pub fn dot_size(dot: &str) -> (usize, usize) {
    let lines = dot.lines().map(str::trim);
    let (mut nodes, mut edges) = (0, 0);
    for l in lines {
        if l.contains("->") {
            edges += 1;
        } else if l.starts_with('n') && l.contains("[label=") {
            nodes += 1;
        }
    }
    (nodes, edges)
}
