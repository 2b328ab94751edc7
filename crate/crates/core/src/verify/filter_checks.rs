use std::collections::BTreeSet;

use rand::Rng;
use serde_json::json;

use super::{RunConfig, RunError, Sink, Tally};
use crate::dot::{dot_size, emit_lattice_dot};
use crate::engine::generate_clone;
use crate::filter::{
    cf_member, filter_lattice, ideal_of_unary, membership_by_certificate, unary_with_fix,
    MembershipCertificate, PrincipalFilter,
};
use crate::ops::{diagonal, fix_set, nix_set, tuples, OpTable, Subset};

/// Every idempotent table of arity `1..=max_arity`.
pub(crate) fn idempotent_tables(q: usize, max_arity: usize) -> Vec<OpTable> {
    let mut out = Vec::new();
    for k in 1..=max_arity {
        let free: Vec<usize> = tuples(q, k)
            .enumerate()
            .filter(|(_, t)| t.iter().any(|&x| x != t[0]))
            .map(|(i, _)| i)
            .collect();
        let base: Vec<u8> = tuples(q, k).map(|t| t[0]).collect();
        let total = (q as u64).pow(free.len() as u32);
        for mut code in 0..total {
            let mut table = base.clone();
            for &i in &free {
                table[i] = (code % q as u64) as u8;
                code /= q as u64;
            }
            out.push(OpTable::new(q, k, table).expect("valid table"));
        }
    }
    out
}

/// Every table of the given arity with `fix ⊇ a`.
pub(crate) fn cf_tables(q: usize, arity: usize, a: Subset) -> BTreeSet<Vec<u8>> {
    let filter = PrincipalFilter::new(q, a).expect("subset of the base");
    let len = q.pow(arity as u32);
    let total = (q as u64).pow(len as u32);
    (0..total)
        .filter_map(|mut code| {
            let table: Vec<u8> = (0..len)
                .map(|_| {
                    let v = (code % q as u64) as u8;
                    code /= q as u64;
                    v
                })
                .collect();
            let f = OpTable::new(q, arity, table).expect("valid table");
            cf_member(&f, &filter).then(|| f.into_table())
        })
        .collect()
}

/// Discrepancies between the closure of `idem ∪ {g}` at arities `1..=2`
/// and `C_F` with `F` generated by `fix(g)`.
pub(crate) fn cross_check(
    q: usize,
    idem: &[OpTable],
    a: Subset,
    arity_bound: usize,
    size_bound: usize,
) -> Result<Vec<(usize, usize)>, RunError> {
    let g = unary_with_fix(q, a)?;
    let mut gens = idem.to_vec();
    gens.push(g);
    let closure = generate_clone(&gens, q, arity_bound, size_bound)?;
    let mut out = Vec::new();
    for k in 1..=2 {
        let got: BTreeSet<Vec<u8>> = closure.ops(k).iter().map(|f| f.table().to_vec()).collect();
        let want = cf_tables(q, k, a);
        let diff = got.symmetric_difference(&want).count();
        out.push((k, if closure.saturated(k) { diff } else { diff.max(1) }));
    }
    Ok(out)
}

/// `None` when the answer for `f` is right and its certificate re-evaluates.
pub(crate) fn certificate_problem(f: &OpTable, a: Subset, g: &OpTable) -> Option<String> {
    let fix = fix_set(f);
    match membership_by_certificate(f, a, g) {
        Ok(MembershipCertificate::Certified(c)) => {
            if !a.is_subset(fix) {
                Some("certified although fix(f) misses part of A".into())
            } else if !c.certifies(f) {
                Some("certificate does not evaluate to f".into())
            } else if !c.generators.iter().all(|h| h == g || h.is_idempotent()) {
                Some("certificate uses a generator outside C3 ∪ {g}".into())
            } else {
                None
            }
        }
        Ok(MembershipCertificate::Refused { witness }) => {
            (!(a.contains(witness) && !fix.contains(witness))).then(|| format!("bogus refusal witness {witness}"))
        }
        Err(e) => Some(e.to_string()),
    }
}

pub(super) fn run(cfg: &RunConfig, sink: &mut Sink) -> Result<(), RunError> {
    let fc = cfg.filters.clone();
    let (arity_bound, size_bound) = (cfg.arity_bound, cfg.size_bound);

    sink.run("filters.cross_check", |sink, _| {
        let q = fc.q;
        let mut t = Tally::default();
        let idem3 = idempotent_tables(q, 3);
        let idem2 = idempotent_tables(q, 2);
        let mut literal = Vec::new();
        for a in Subset::full(q).subsets() {
            if unary_with_fix(q, a).is_err() {
                t.skip(2);
                continue;
            }
            for (k, diff) in cross_check(q, &idem3, a, arity_bound, size_bound)? {
                t.record(diff == 0, || format!("A = {a:?}, arity {k}: {diff} tables differ"));
            }
            let diffs: Vec<usize> = cross_check(q, &idem2, a, arity_bound, size_bound)?
                .into_iter()
                .map(|(_, d)| d)
                .collect();
            literal.push(json!({ "A": a, "discrepancies_by_arity": diffs }));
        }
        sink.observe(
            "filters.cross_check_binary_generators",
            "the same comparison with idempotent generators of arity at most 2 only",
            json!(literal),
        );
        Ok(t.finish(
            "filters.cross_check",
            "the closure of the idempotent tables (arity <= 3) and g equals C_F at arities 1 and 2",
        ))
    })?;

    let mut example = None;
    sink.run("filters.certificates", |_, rng| {
        let q = fc.certificate_q;
        let mut t = Tally::default();
        let subsets: Vec<Subset> = Subset::full(q)
            .subsets()
            .filter(|&a| unary_with_fix(q, a).is_ok())
            .collect();
        for &a in &subsets {
            let g = unary_with_fix(q, a)?;
            for table in tuples(q, q) {
                let f = OpTable::new(q, 1, table)?;
                let p = certificate_problem(&f, a, &g);
                t.record(p.is_none(), || format!("unary {:?}, A = {a:?}: {}", f.table(), p.unwrap_or_default()));
            }
        }
        for i in 0..fc.binary_samples {
            let a = subsets[rng.gen_range(0..subsets.len())];
            let g = unary_with_fix(q, a)?;
            let respect = rng.gen_bool(0.5);
            let f = OpTable::from_fn(q, 2, |x| {
                if respect && x[0] == x[1] && a.contains(x[0] as usize) {
                    x[0]
                } else {
                    rng.gen_range(0..q as u8)
                }
            })?;
            let p = certificate_problem(&f, a, &g);
            t.record(p.is_none(), || format!("binary sample {i}: {}", p.unwrap_or_default()));
            if example.is_none() && a.is_subset(fix_set(&f)) && !f.is_idempotent() {
                if let Ok(MembershipCertificate::Certified(c)) = membership_by_certificate(&f, a, &g) {
                    example = Some(json!({ "base": q, "A": a, "target": f, "certificate": c }));
                }
            }
        }
        Ok(t.finish(
            "filters.certificates",
            "members with A ⊆ fix(f) get verified terms; the rest get genuine witnesses",
        ))
    })?;
    if let Some(ex) = example {
        sink.artifact("membership_certificate.json".into(), serde_json::to_string_pretty(&ex)?);
    }

    sink.run("filters.covers", |_, _| {
        let mut t = Tally::default();
        for q in 1..=fc.lattice_max_q {
            let l = filter_lattice(q, fc.lattice_max_q)?;
            let mut coatoms = l.coatoms();
            coatoms.sort_unstable();
            let ultra: Vec<usize> = (0..q).map(|p| 1usize << p).collect();
            t.record(l.covers == l.one_point_extensions() && coatoms == ultra, || {
                format!("q = {q}: covers differ from one-point extensions")
            });
        }
        Ok(t.finish(
            "filters.covers",
            "covers of the filter lattice are exactly the one-point extensions",
        ))
    })?;

    sink.run("filters.ideal", |_, rng| {
        let q = fc.certificate_q;
        let mut t = Tally::default();
        for i in 0..fc.ideal_samples {
            let count = rng.gen_range(1..=3);
            let ops: Vec<OpTable> = (0..count)
                .map(|_| OpTable::from_fn(q, 1, |_| rng.gen_range(0..q as u8)))
                .collect::<Result<_, _>>()?;
            let ideal = ideal_of_unary(q, &ops)?;
            let top = ops.iter().fold(Subset::EMPTY, |acc, f| acc.union(nix_set(&diagonal(f))));
            let want: Vec<Subset> = top.subsets().collect();
            let mut got: Vec<Subset> = ideal.sets().collect();
            got.sort_by_key(|s| s.bits());
            let mut want_sorted = want.clone();
            want_sorted.sort_by_key(|s| s.bits());
            t.record(ideal.verify() && got == want_sorted, || {
                format!("sample {i}: ideal is not the power set of {top:?} or a witness fails")
            });
        }
        Ok(t.finish(
            "filters.ideal",
            "nix-sets reachable from unary generators form the power set of their union, with witnesses",
        ))
    })?;

    let q = fc.certificate_q;
    let lattice = filter_lattice(q, fc.lattice_max_q.max(q))?;
    let labels = lattice.labels();
    let dot = emit_lattice_dot(&format!("filters(q={q})"), &labels, |i, j| {
        lattice.filters[i].is_subfilter_of(&lattice.filters[j])
    })?;
    let (nodes, edges) = dot_size(&dot);
    sink.observe(
        "filters.lattice_diagram",
        "size of the filter lattice diagram",
        json!({ "q": q, "nodes": nodes, "edges": edges }),
    );
    sink.artifact(format!("filter_lattice_q{q}.dot"), dot);
    Ok(())
}
