//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Every expected value is recomputed here by brute force rather than taken
//! from the library.

use std::collections::{BTreeSet, HashMap};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cloneforge_core::filter::{filter_lattice, membership_by_certificate, unary_with_fix, MembershipCertificate};
use cloneforge_core::ops::tuples;
use cloneforge_core::semilattice::corpus::standard_corpus;
use cloneforge_core::semilattice::{
    congruence_to_order, e_interpolate, enumerate_congruences, interval_partition_to_set,
    interval_partitions, order_of_unary_generators, order_to_congruence, set_to_interval_partition,
    DEFAULT_ENUMERATION_BOUND,
};
use cloneforge_core::shift::sample::{random_theorem_instance, sample_bases, sample_equivariant, sample_pol_sn};
use cloneforge_core::shift::{divisibility_counterexample, pol_sn_member, theorem_interpolation};
use cloneforge_core::{
    generate_clone, Certificate, CompositionTree, Congruence, CongruenceOrder, OpTable, Point, Semilattice,
    Subset, WindowedOp, Window,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const Y: u32 = 2;
const SAMPLES: usize = 200;

fn window() -> Window {
    Window::new(-24, 24).unwrap()
}

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn from_failures(cases: usize, failures: &[String]) -> Self {
        Outcome {
            ok: failures.is_empty() && cases > 0,
            detail: match failures.first() {
                None => format!("{cases} cases"),
                Some(f) => format!("{} of {cases} cases failed, first: {f}", failures.len()),
            },
        }
    }
}

// ---------- oracles ----------

/// `f(s^k x) = s^k f(x)` for every tabulated pair and every nonzero
/// multiple `k` of `n`, by direct lookup.
fn commutes_with_power(f: &WindowedOp, n: u64) -> bool {
    let table: HashMap<&Vec<Point>, Point> = f.entries().collect();
    let span = f.window().hi() - f.window().lo();
    let n = n as i64;
    for (x, v) in &table {
        let mut k = n;
        while k <= span {
            for k in [k, -k] {
                let sx: Vec<Point> = x.iter().map(|p| Point::new(p.component, p.level + k)).collect();
                if let Some(w) = table.get(&sx) {
                    if *w != Point::new(v.component, v.level + k) {
                        return false;
                    }
                }
            }
            k += n;
        }
    }
    true
}

fn parallel(a: &[Point], b: &[Point]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(p, r)| p.component == r.component)
        && a.iter().zip(b).all(|(p, r)| r.level - p.level == b[0].level - a[0].level)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn eval_term(tree: &CompositionTree, gens: &[OpTable], x: &[u8]) -> u8 {
    match tree {
        CompositionTree::Projection { index, .. } => x[index - 1],
        CompositionTree::Generator { index } => gens[*index].eval(x),
        CompositionTree::Apply { head, args } => {
            let inner: Vec<u8> = args.iter().map(|a| eval_term(a, gens, x)).collect();
            gens[*head].eval(&inner)
        }
    }
}

/// Pointwise agreement of a certificate with `f` on every tuple.
fn term_equals(c: &Certificate, f: &OpTable) -> bool {
    tuples(f.base(), f.arity()).all(|x| eval_term(&c.tree, &c.generators, &x) == f.eval(&x))
}

fn fixes(f: &OpTable) -> BTreeSet<u8> {
    (0..f.base() as u8).filter(|&x| f.eval(&vec![x; f.arity()]) == x).collect()
}

fn all_tables(q: usize, arity: usize) -> Vec<OpTable> {
    let len = q.pow(arity as u32);
    (0..(q as u64).pow(len as u32))
        .map(|mut code| {
            let t = (0..len)
                .map(|_| {
                    let v = (code % q as u64) as u8;
                    code /= q as u64;
                    v
                })
                .collect();
            OpTable::new(q, arity, t).unwrap()
        })
        .collect()
}

/// All partitions of `0..q` compatible with the join, by brute force.
fn brute_congruences(s: &Semilattice) -> BTreeSet<Vec<usize>> {
    let q = s.size();
    let mut out = BTreeSet::new();
    let mut labels = vec![0usize; q];
    fn rec(i: usize, max: usize, labels: &mut Vec<usize>, s: &Semilattice, out: &mut BTreeSet<Vec<usize>>) {
        let q = labels.len();
        if i == q {
            let ok = (0..q).all(|a| {
                (0..q).all(|b| {
                    labels[a] != labels[b] || (0..q).all(|c| labels[s.join(a, c)] == labels[s.join(b, c)])
                })
            });
            if ok {
                out.insert(labels.clone());
            }
            return;
        }
        for l in 0..=max {
            labels[i] = l;
            rec(i + 1, if l == max { max + 1 } else { max }, labels, s, out);
        }
    }
    if q > 0 {
        rec(1, 1, &mut labels, s, &mut out);
    }
    out
}

fn in_e(s: &Semilattice, r: &CongruenceOrder, f: &OpTable) -> bool {
    tuples(s.size(), f.arity()).all(|x| {
        let top = x.iter().fold(x[0] as usize, |acc, &v| s.join(acc, v as usize));
        r.holds(f.eval(&x) as usize, top)
    })
}

fn random_e_member(rng: &mut ChaCha8Rng, s: &Semilattice, r: &CongruenceOrder, arity: usize) -> OpTable {
    let q = s.size();
    OpTable::from_fn(q, arity, |x| {
        let top = x.iter().fold(x[0] as usize, |acc, &v| s.join(acc, v as usize));
        let allowed: Vec<u8> = (0..q as u8).filter(|&v| r.holds(v as usize, top)).collect();
        *allowed.choose(rng).unwrap()
    })
    .unwrap()
}

// ---------- shared instance generators ----------

fn theorem_runs() -> Vec<Result<(cloneforge_core::shift::sample::TheoremInstance, cloneforge_core::shift::TheoremInterpolation), String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..100)
        .map(|i| {
            let n_star = 2 + (i % 2) as u64;
            let inst = random_theorem_instance(&mut rng, n_star, 4, Y, window());
            theorem_interpolation(&inst.g, &inst.tuples, &inst.witnesses)
                .map(|out| (inst, out))
                .map_err(|e| format!("instance {i}: {e}"))
        })
        .collect()
}

struct EInstance {
    s: Semilattice,
    r: CongruenceOrder,
    f: OpTable,
    tuples: Vec<Vec<u8>>,
}

fn e_instances() -> Vec<EInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let corpus = standard_corpus(&mut rng, 5, 50);
    (0..500)
        .map(|_| {
            let (_, s) = corpus.choose(&mut rng).unwrap().clone();
            let cons = enumerate_congruences(&s, DEFAULT_ENUMERATION_BOUND).unwrap();
            let r = congruence_to_order(&s, cons.choose(&mut rng).unwrap());
            let arity = rng.gen_range(1..=3);
            let f = random_e_member(&mut rng, &s, &r, arity);
            let mut all: Vec<Vec<u8>> = tuples(s.size(), arity).collect();
            all.shuffle(&mut rng);
            all.truncate(rng.gen_range(1..=4usize.min(all.len())));
            EInstance { s, r, f, tuples: all }
        })
        .collect()
}

/// `(f, A, g)` triples for the certificate criterion on three points.
fn certificate_cases() -> Vec<(OpTable, Subset, OpTable)> {
    let q = 3;
    let mut out = Vec::new();
    for a in Subset::full(q).subsets() {
        let g = unary_with_fix(q, a).unwrap();
        for f in all_tables(q, 1) {
            out.push((f, a, g.clone()));
        }
    }
    let subsets: Vec<Subset> = Subset::full(q).subsets().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..500 {
        let a = *subsets.choose(&mut rng).unwrap();
        let respect = rng.gen_bool(0.5);
        let f = OpTable::from_fn(q, 2, |x| {
            if respect && x[0] == x[1] && a.contains(x[0] as usize) {
                x[0]
            } else {
                rng.gen_range(0..q as u8)
            }
        })
        .unwrap();
        out.push((f, a, unary_with_fix(q, a).unwrap()));
    }
    out
}

/// Closure of the idempotent tables up to `idem_arity` plus a unary `g`
/// with `fix(g) = A`, compared with `{f : fix(f) ⊇ A}` at arities 1 and 2.
fn filter_cross_check(idem_arity: usize) -> (Vec<String>, usize, Vec<String>) {
    let q = 2;
    let mut idem: Vec<OpTable> = Vec::new();
    for k in 1..=idem_arity {
        idem.extend(all_tables(q, k).into_iter().filter(|f| fixes(f).len() == q));
    }
    let mut discrepancies = Vec::new();
    let mut bad_trees = Vec::new();
    let mut cases = 0;
    for bits in 0..4u64 {
        let a = Subset::from_bits(bits);
        let want_fix: BTreeSet<u8> = a.iter().map(|x| x as u8).collect();
        // identity, negation and the two constants cover every fix-set
        let g = OpTable::new(q, 1, (0..2u8).map(|x| if a.contains(x as usize) { x } else if a.is_empty() { 1 - x } else { a.min().unwrap() as u8 }).collect()).unwrap();
        assert_eq!(fixes(&g), want_fix);
        let mut gens = idem.clone();
        gens.push(g);
        let closure = generate_clone(&gens, q, 3, 2_000_000).unwrap();
        for k in 1..=2 {
            cases += 1;
            let got: BTreeSet<Vec<u8>> = closure.ops(k).iter().map(|f| f.table().to_vec()).collect();
            let want: BTreeSet<Vec<u8>> = all_tables(q, k)
                .into_iter()
                .filter(|f| want_fix.is_subset(&fixes(f)))
                .map(|f| f.table().to_vec())
                .collect();
            let diff = got.symmetric_difference(&want).count();
            if diff > 0 || !closure.saturated(k) {
                discrepancies.push(format!("A = {want_fix:?}, arity {k}: {diff} tables differ"));
            }
            for f in closure.ops(k) {
                let tree = closure.tree_of(f).unwrap();
                let c = Certificate { generators: gens.clone(), tree };
                if !term_equals(&c, f) {
                    bad_trees.push(format!("derivation of {:?} for A = {want_fix:?}", f.table()));
                }
            }
        }
    }
    (discrepancies, cases, bad_trees)
}

// ---------- criteria ----------

fn divisibility() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = Vec::new();
    let mut cases = 0;
    for n in 1..=8u64 {
        for m in 1..=8u64 {
            if m % n == 0 {
                for s in 0..SAMPLES {
                    cases += 1;
                    let f = sample_pol_sn(&mut rng, n, 1 + s % 2, Y, window());
                    let ok = commutes_with_power(&f, n) && pol_sn_member(&f, m) && commutes_with_power(&f, m);
                    if !ok {
                        failures.push(format!("sample {s} of Pol(s^{n}) at step {m}"));
                    }
                }
            } else {
                cases += 1;
                match divisibility_counterexample(n, m, Y, window()) {
                    Ok(Some(d)) if commutes_with_power(&d, n) && !commutes_with_power(&d, m) => {}
                    other => failures.push(format!("({n}, {m}): {other:?}")),
                }
            }
        }
    }
    Outcome::from_failures(cases, &failures)
}

fn gcd_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    let mut cases = 0;
    for n in 2..=8u64 {
        for m in 2..=8u64 {
            let inner = window().inner((n + m) as i64).expect("window wide enough");
            let d = gcd(n, m);
            for s in 0..SAMPLES {
                cases += 1;
                let arity = 1 + s % 2;
                let bases = sample_bases(&mut rng, arity, Y, window());
                let f = sample_equivariant(&mut rng, &[n, m], arity, Y, window(), &bases);
                let r = f.restrict(inner);
                let ok = commutes_with_power(&f, n)
                    && commutes_with_power(&f, m)
                    && pol_sn_member(&r, d)
                    && commutes_with_power(&r, d);
                if !ok {
                    failures.push(format!("sample {s} for ({n}, {m})"));
                }
            }
        }
    }
    Outcome::from_failures(cases, &failures)
}

fn theorem() -> Outcome {
    let mut failures = Vec::new();
    let runs = theorem_runs();
    for run in &runs {
        let (inst, out) = match run {
            Ok(r) => r,
            Err(e) => {
                failures.push(e.clone());
                continue;
            }
        };
        if out.n_star != inst.n_star {
            failures.push(format!("n* = {} instead of {}", out.n_star, inst.n_star));
        }
        for t in &inst.tuples {
            if out.op.get(t).is_none() || out.op.get(t) != inst.g.get(t) {
                failures.push(format!("value at {t:?} differs"));
            }
        }
        for (i, sep) in out.recipe.separators.iter().enumerate() {
            let (a, b) = (&inst.tuples[sep.pair.0], &inst.tuples[sep.pair.1]);
            match (out.recipe.separator_value(i, a), out.recipe.separator_value(i, b)) {
                (Some(fa), Some(fb)) => {
                    let (mut ea, mut eb) = (a.clone(), b.clone());
                    ea.push(fa);
                    eb.push(fb);
                    if parallel(&ea, &eb) {
                        failures.push(format!("pair {:?} still parallel", sep.pair));
                    }
                }
                _ => failures.push(format!("separator for {:?} undefined", sep.pair)),
            }
        }
        if !commutes_with_power(&out.op, inst.n_star) {
            failures.push("result does not commute with s^n*".into());
        }
    }
    Outcome::from_failures(runs.len(), &failures)
}

fn bijection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let corpus = standard_corpus(&mut rng, 6, 50);
    let mut failures = Vec::new();
    let mut cases = 0;
    for (name, s) in &corpus {
        let cons = enumerate_congruences(s, DEFAULT_ENUMERATION_BOUND).unwrap();
        let listed: BTreeSet<Vec<usize>> = cons.iter().map(|c| c.labels().to_vec()).collect();
        if listed != brute_congruences(s) || listed.len() != cons.len() {
            failures.push(format!("{name}: congruence list differs from brute force"));
        }
        for theta in &cons {
            cases += 1;
            let r = congruence_to_order(s, theta);
            let q = s.size();
            let direct = (0..q).all(|x| (0..q).all(|y| r.holds(x, y) == theta.related(s.join(x, y), y)));
            let back = order_to_congruence(&r);
            if !direct || &back != theta || congruence_to_order(s, &back) != r {
                failures.push(format!("{name}: {theta}"));
            }
        }
    }
    Outcome::from_failures(cases, &failures)
}

fn galois() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let corpus = standard_corpus(&mut rng, 5, 50);
    let mut failures = Vec::new();
    let mut cases = 0;
    for (name, s) in &corpus {
        for theta in enumerate_congruences(s, DEFAULT_ENUMERATION_BOUND).unwrap() {
            cases += 1;
            let r = congruence_to_order(s, &theta);
            let unary: Vec<OpTable> = all_tables(s.size(), 1).into_iter().filter(|f| in_e(s, &r, f)).collect();
            match order_of_unary_generators(s, &unary) {
                Ok(got) if got == r => {}
                other => failures.push(format!("{name}, {theta}: {other:?}")),
            }
        }
    }
    for (i, inst) in e_instances().iter().enumerate() {
        cases += 1;
        match e_interpolate(&inst.s, &inst.r, &inst.f, &inst.tuples) {
            Ok(out) => {
                let ok = inst.tuples.iter().all(|x| out.op.eval(x) == inst.f.eval(x))
                    && term_equals(&out.certificate, &out.op)
                    && out.certificate.generators.iter().all(|g| in_e(&inst.s, &inst.r, g))
                    && in_e(&inst.s, &inst.r, &out.op);
                if !ok {
                    failures.push(format!("instance {i}"));
                }
            }
            Err(e) => failures.push(format!("instance {i}: {e}")),
        }
    }
    Outcome::from_failures(cases, &failures)
}

fn max_chain() -> Outcome {
    let n = 8;
    let mut failures = Vec::new();
    let mut cases = 0;
    let parts = interval_partitions(n).unwrap();
    if parts.len() != 128 {
        failures.push(format!("{} interval partitions", parts.len()));
    }
    let chain = Semilattice::chain(n).unwrap();
    let brute: BTreeSet<Vec<usize>> = brute_congruences(&chain);
    let listed: BTreeSet<Vec<usize>> = parts.iter().map(|c| c.labels().to_vec()).collect();
    if brute != listed {
        failures.push("interval partitions differ from the congruences of the chain".into());
    }
    for theta in &parts {
        cases += 1;
        let a = interval_partition_to_set(n, theta).unwrap();
        if set_to_interval_partition(n, a).unwrap() != *theta {
            failures.push(format!("{theta}"));
        }
    }
    for bits in 0..(1u64 << (n - 1)) {
        cases += 1;
        let a = Subset::from_bits(bits);
        let theta = set_to_interval_partition(n, a).unwrap();
        // k < m related iff no cut a with k <= a < m
        let direct = Congruence::from_labels(&(0..n).map(|x| (0..x).filter(|&c| a.contains(c)).count()).collect::<Vec<_>>());
        if theta != direct || interval_partition_to_set(n, &theta).unwrap() != a {
            failures.push(format!("cut set {bits:#b}"));
        }
    }
    Outcome::from_failures(cases, &failures)
}

fn filter_correspondence(idem_arity: usize) -> Outcome {
    let (discrepancies, cases, _) = filter_cross_check(idem_arity);
    Outcome::from_failures(cases, &discrepancies)
}

fn certificates() -> Outcome {
    let mut failures = Vec::new();
    let cases = certificate_cases();
    for (f, a, g) in &cases {
        let fix: BTreeSet<u8> = fixes(f);
        let inside = a.iter().all(|x| fix.contains(&(x as u8)));
        match membership_by_certificate(f, *a, g) {
            Ok(MembershipCertificate::Certified(c)) => {
                let gens_ok = c.generators.iter().all(|h| h == g || fixes(h).len() == 3);
                if !inside || !term_equals(&c, f) || !gens_ok {
                    failures.push(format!("{:?} with A = {a:?}: bad certificate", f.table()));
                }
            }
            Ok(MembershipCertificate::Refused { witness }) => {
                if inside || !a.contains(witness) || fix.contains(&(witness as u8)) {
                    failures.push(format!("{:?} with A = {a:?}: refused at {witness}", f.table()));
                }
            }
            Err(e) => failures.push(format!("{:?} with A = {a:?}: {e}", f.table())),
        }
    }
    Outcome::from_failures(cases.len(), &failures)
}

fn covers() -> Outcome {
    let mut failures = Vec::new();
    for q in 1..=5usize {
        let l = filter_lattice(q, 5).unwrap();
        // F_B ⊆ F_A iff A ⊆ B; covers differ by one point
        let mut want = Vec::new();
        for a in 0..(1usize << q) {
            for b in 0..(1usize << q) {
                if a & b == a && (b & !a).count_ones() == 1 {
                    want.push((b, a));
                }
            }
        }
        want.sort_unstable();
        let mut got = l.covers.clone();
        got.sort_unstable();
        if got != want {
            failures.push(format!("q = {q}"));
        }
    }
    Outcome::from_failures(5, &failures)
}

fn soundness() -> Outcome {
    let mut failures = Vec::new();
    let mut cases = 0;
    for run in theorem_runs().iter().flatten() {
        let (_, out) = run;
        for (x, v) in out.op.entries() {
            cases += 1;
            if out.recipe.eval(x) != Some(v) {
                failures.push(format!("theorem recipe at {x:?}"));
            }
        }
    }
    for (i, inst) in e_instances().iter().enumerate() {
        if let Ok(out) = e_interpolate(&inst.s, &inst.r, &inst.f, &inst.tuples) {
            cases += 1;
            if !term_equals(&out.certificate, &out.op) {
                failures.push(format!("semilattice instance {i}"));
            }
        }
    }
    for idem_arity in [2, 3] {
        let (_, _, bad) = filter_cross_check(idem_arity);
        cases += 1;
        failures.extend(bad);
    }
    for (f, a, g) in certificate_cases() {
        if let Ok(MembershipCertificate::Certified(c)) = membership_by_certificate(&f, a, &g) {
            cases += 1;
            if !term_equals(&c, &f) || !c.certifies(&f) {
                failures.push(format!("filter certificate for {:?}", f.table()));
            }
        }
    }
    Outcome::from_failures(cases, &failures)
}

fn main() -> ExitCode {
    type Criterion = (&'static str, &'static str, fn() -> Outcome, Option<u64>);
    let criteria: [Criterion; 11] = [
        ("1", "divisibility correspondence", divisibility, Some(30)),
        ("2", "subgroup and gcd law", gcd_law, None),
        ("3", "separator-and-interpolate construction", theorem, Some(60)),
        ("4", "congruence and order bijection", bijection, None),
        ("5", "Galois round-trips", galois, Some(120)),
        ("6", "(N, max) cut sets", max_chain, None),
        ("7", "filter correspondence, idempotent generators of arity <= 2", || filter_correspondence(2), None),
        ("7s", "filter correspondence, idempotent generators of arity <= 3", || filter_correspondence(3), None),
        ("8", "certificate completeness", certificates, Some(30)),
        ("9", "filter-lattice covers", covers, None),
        ("10", "engine soundness", soundness, None),
    ];
    let mut all_ok = true;
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let mut out = run();
        let took = start.elapsed();
        if let Some(secs) = limit {
            if took > Duration::from_secs(secs) {
                out.ok = false;
                out.detail.push_str(&format!("; over the {secs} s limit"));
            }
        }
        all_ok &= out.ok;
        println!(
            "criterion {id:<3} {:<4} {name}: {} ({:.2} s)",
            if out.ok { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64()
        );
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
