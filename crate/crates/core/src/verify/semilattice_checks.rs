use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

use super::{RunConfig, RunError, Sink, Tally};
use crate::dot::{dot_size, emit_lattice_dot};
use crate::ops::{tuples, OpTable, Subset};
use crate::semilattice::corpus::standard_corpus;
use crate::semilattice::{
    congruence_to_order, e_interpolate, e_member, enumerate_congruences, interval_partition_to_set,
    interval_partitions, order_of_unary_generators, order_to_congruence, set_to_interval_partition,
    CongruenceOrder, Semilattice, DEFAULT_ENUMERATION_BOUND,
};

/// Every unary member of `E(⊑)`: maps with `f(y) ⊑ y`.
pub(crate) fn unary_members(s: &Semilattice, order: &CongruenceOrder) -> Vec<OpTable> {
    let q = s.size();
    let choices: Vec<Vec<u8>> = (0..q)
        .map(|y| (0..q as u8).filter(|&v| order.holds(v as usize, y)).collect())
        .collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; q];
    loop {
        let table = pick.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        out.push(OpTable::new(q, 1, table).expect("values below q"));
        let mut pos = q;
        loop {
            if pos == 0 {
                return out;
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

/// A random member of `E(⊑)` of the given arity.
pub(crate) fn random_e_member<R: Rng>(rng: &mut R, s: &Semilattice, order: &CongruenceOrder, arity: usize) -> OpTable {
    let q = s.size();
    OpTable::from_fn(q, arity, |t| {
        let top = s.join_all(t) as usize;
        let allowed: Vec<u8> = (0..q as u8).filter(|&v| order.holds(v as usize, top)).collect();
        *allowed.choose(rng).expect("top is below itself")
    })
    .expect("valid table")
}

pub(super) fn run(cfg: &RunConfig, sink: &mut Sink) -> Result<(), RunError> {
    let lc = cfg.semilattice.clone();
    let bound = DEFAULT_ENUMERATION_BOUND;

    sink.run("semilattice.bijection", |sink, _| {
        let mut corpus_rng = sink.rng("semilattice.corpus");
        let corpus = standard_corpus(&mut corpus_rng, lc.max_size, lc.random);
        let mut t = Tally::default();
        for (name, s) in &corpus {
            for theta in enumerate_congruences(s, bound)? {
                let r = congruence_to_order(s, &theta);
                let back = order_to_congruence(&r);
                let again = congruence_to_order(s, &back);
                t.record(back == theta && again == r, || format!("{name}: {theta} does not round-trip"));
            }
        }
        Ok(t.finish(
            "semilattice.bijection",
            "congruences and congruence orders are mutually inverse",
        ))
    })?;

    sink.run("semilattice.order_recovery", |sink, _| {
        let mut corpus_rng = sink.rng("semilattice.corpus");
        let corpus = standard_corpus(&mut corpus_rng, lc.recovery_max_size, lc.random);
        let mut t = Tally::default();
        for (name, s) in &corpus {
            for theta in enumerate_congruences(s, bound)? {
                let r = congruence_to_order(s, &theta);
                let recovered = order_of_unary_generators(s, &unary_members(s, &r))?;
                t.record(recovered == r, || format!("{name}: order of {theta} not recovered"));
            }
        }
        Ok(t.finish(
            "semilattice.order_recovery",
            "the order generated by the unary members of E(R) is R",
        ))
    })?;

    let mut example = None;
    sink.run("semilattice.e_interpolation", |sink, rng| {
        let mut corpus_rng = sink.rng("semilattice.corpus");
        let corpus = standard_corpus(&mut corpus_rng, lc.recovery_max_size, lc.random);
        let mut t = Tally::default();
        for i in 0..lc.interpolation_instances {
            let (name, s) = &corpus[rng.gen_range(0..corpus.len())];
            let cons = enumerate_congruences(s, bound)?;
            let r = congruence_to_order(s, &cons[rng.gen_range(0..cons.len())]);
            let q = s.size();
            let arity = rng.gen_range(1..=3usize);
            let f = random_e_member(rng, s, &r, arity);
            let mut all: Vec<Vec<u8>> = tuples(q, arity).collect();
            all.shuffle(rng);
            all.truncate(rng.gen_range(1..=4usize.min(all.len())));
            match e_interpolate(s, &r, &f, &all) {
                Ok(out) => {
                    let ok = all.iter().all(|a| out.op.eval(a) == f.eval(a))
                        && out.certificate.certifies(&out.op)
                        && out.certificate.generators.iter().all(|g| e_member(s, &r, g))
                        && e_member(s, &r, &out.op);
                    t.record(ok, || format!("instance {i} on {name}: certificate check failed"));
                    if example.is_none() && all.len() > 1 {
                        example = Some(json!({
                            "semilattice": s,
                            "order": r,
                            "target": f,
                            "tuples": all,
                            "certificate": out.certificate,
                        }));
                    }
                }
                Err(e) => t.record(false, || format!("instance {i} on {name}: {e}")),
            }
        }
        Ok(t.finish(
            "semilattice.e_interpolation",
            "members of E(R) are interpolated by verified terms over E(R)",
        ))
    })?;
    if let Some(ex) = example {
        sink.artifact("e_interpolation_certificate.json".into(), serde_json::to_string_pretty(&ex)?);
    }

    sink.run("semilattice.chain_cuts", |_, _| {
        let n = lc.chain_n;
        let mut t = Tally::default();
        for theta in interval_partitions(n)? {
            let a = interval_partition_to_set(n, &theta)?;
            t.record(set_to_interval_partition(n, a)? == theta, || format!("{theta} does not round-trip"));
        }
        for a in Subset::full(n - 1).subsets() {
            let theta = set_to_interval_partition(n, a)?;
            t.record(interval_partition_to_set(n, &theta)? == a, || format!("{a:?} does not round-trip"));
        }
        Ok(t.finish(
            "semilattice.chain_cuts",
            "interval partitions of the chain and cut sets correspond",
        ))
    })?;

    let chain = Semilattice::chain(lc.dot_chain)?;
    let cons = enumerate_congruences(&chain, bound)?;
    let labels: Vec<String> = cons.iter().map(|c| c.to_string()).collect();
    let dot = emit_lattice_dot(&format!("Con(chain{})", lc.dot_chain), &labels, |i, j| {
        cons[i].refines(&cons[j])
    })?;
    let (nodes, edges) = dot_size(&dot);
    sink.observe(
        "semilattice.con_chain",
        "size of the congruence lattice diagram of the chain",
        json!({ "n": lc.dot_chain, "nodes": nodes, "edges": edges }),
    );
    sink.artifact(format!("con_chain{}.dot", lc.dot_chain), dot);
    Ok(())
}
