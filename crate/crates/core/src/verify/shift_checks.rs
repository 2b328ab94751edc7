use rand::Rng;
use serde_json::json;

use super::{RunConfig, RunError, Sink, Tally};
use crate::shift::sample::{random_theorem_instance, sample_bases, sample_equivariant, sample_pol_sn};
use crate::shift::{
    divisibility_counterexample, parallel_offset, periodic_op, pol_sn_member, shift_group,
    theorem_interpolation, unary_reduction, Point, SeparatorKind, Step, TheoremInterpolation,
    WindowedOp,
};

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(super) fn run(cfg: &RunConfig, sink: &mut Sink) -> Result<(), RunError> {
    let sc = cfg.shift.clone();
    let (y, win) = (sc.y_count, sc.window);

    sink.run("shift.divisibility", |_, rng| {
        let mut t = Tally::default();
        for n in 1..=sc.max_step {
            for m in 1..=sc.max_step {
                if m % n == 0 {
                    for s in 0..sc.samples {
                        let f = sample_pol_sn(rng, n, 1 + s % 2, y, win);
                        t.record(pol_sn_member(&f, n) && pol_sn_member(&f, m), || {
                            format!("sample {s} of Pol(s^{n}) fails at step {m}")
                        });
                    }
                } else {
                    let ok = matches!(
                        divisibility_counterexample(n, m, y, win),
                        Ok(Some(d)) if pol_sn_member(&d, n) && !pol_sn_member(&d, m)
                    );
                    t.record(ok, || format!("no counterexample for {n} not dividing {m}"));
                }
            }
        }
        Ok(t.finish(
            "shift.divisibility",
            "n | m sends sampled Pol(s^n) members into Pol(s^m); n ∤ m yields a separating op",
        ))
    })?;

    sink.run("shift.gcd", |_, rng| {
        let mut t = Tally::default();
        for n in 2..=sc.max_step {
            for m in 2..=sc.max_step {
                let Some(inner) = win.inner((n + m) as i64) else {
                    t.skip(sc.samples as u64);
                    continue;
                };
                let d = gcd(n, m);
                for s in 0..sc.samples {
                    let arity = 1 + s % 2;
                    let bases = sample_bases(rng, arity, y, win);
                    let f = sample_equivariant(rng, &[n, m], arity, y, win, &bases);
                    let ok = pol_sn_member(&f, n)
                        && pol_sn_member(&f, m)
                        && pol_sn_member(&f.restrict(inner), d);
                    t.record(ok, || format!("sample {s} for ({n},{m}) fails at gcd {d}"));
                }
            }
        }
        Ok(t.finish(
            "shift.gcd",
            "ops commuting with s^n and s^m commute with s^gcd(n,m) on the inner window",
        ))
    })?;

    sink.run("shift.group", |_, _| {
        let mut t = Tally::default();
        for n in 1..=sc.max_step {
            let r = shift_group(&[periodic_op(y, win, n)?])?;
            t.record(r.n_star == n, || format!("period {n} op reports n* = {}", r.n_star));
        }
        Ok(t.finish("shift.group", "the period-n map has windowed shift group nZ"))
    })?;

    let mut example: Option<TheoremInterpolation> = None;
    sink.run("shift.theorem", |_, rng| {
        let mut t = Tally::default();
        for i in 0..sc.theorem_instances {
            let n_star = 2 + (i % 2) as u64;
            let inst = random_theorem_instance(rng, n_star, sc.max_tuples, y, win);
            match theorem_interpolation(&inst.g, &inst.tuples, &inst.witnesses) {
                Ok(out) => {
                    let problem = theorem_problem(&out, &inst.g, &inst.tuples, n_star);
                    t.record(problem.is_none(), || format!("instance {i}: {}", problem.unwrap_or_default()));
                    if example.is_none() && out.recipe.separators.iter().any(|s| s.kind != SeparatorKind::Projection) {
                        example = Some(out);
                    }
                }
                Err(e) => t.record(false, || format!("instance {i}: {e}")),
            }
        }
        Ok(t.finish(
            "shift.theorem",
            "the separator-and-interpolate construction matches g on every tuple",
        ))
    })?;
    if let Some(out) = example {
        sink.artifact("theorem_interpolation.json".into(), serde_json::to_string_pretty(&out)?);
    }

    sink.run("shift.reduction", |_, rng| {
        let mut t = Tally::default();
        for i in 0..sc.reduction_samples {
            let g = sample_pol_sn(rng, 2, 2, y, win);
            let b = Point::new(rng.gen_range(0..y), rng.gen_range(win.lo()..win.hi()));
            match unary_reduction(&g, b) {
                Ok(r) => t.record(r.h.arity() == 1 && !pol_sn_member(&r.h, 1), || {
                    format!("sample {i}: reduced op commutes with s")
                }),
                Err(crate::shift::ShiftError::NoViolation) => t.skip(1),
                Err(e) => t.record(false, || format!("sample {i}: {e}")),
            }
        }
        Ok(t.finish(
            "shift.reduction",
            "a binary violation of Pol(s) reduces to a unary one",
        ))
    })?;

    let group = shift_group(&[periodic_op(y, win, 2)?])?;
    sink.observe(
        "shift.group_example",
        "windowed shift group of the period-2 map",
        json!({ "n_star": group.n_star, "members": group.members.len(), "caveat": group.caveat }),
    );
    Ok(())
}

/// `None` when `out` meets every postcondition, including re-evaluation of
/// its recipe on every tabulated entry.
pub(crate) fn theorem_problem(
    out: &TheoremInterpolation,
    g: &WindowedOp,
    tuples: &[Vec<Point>],
    n_star: u64,
) -> Option<String> {
    if out.n_star != n_star {
        return Some(format!("n* = {} instead of {n_star}", out.n_star));
    }
    for t in tuples {
        if out.op.get(t) != g.get(t) || out.recipe.eval(t) != g.get(t) {
            return Some(format!("value at {t:?} differs from g"));
        }
    }
    for (i, s) in out.recipe.separators.iter().enumerate() {
        let (a, b) = (&tuples[s.pair.0], &tuples[s.pair.1]);
        let ext = |x: &[Point]| {
            let mut e = x.to_vec();
            e.push(out.recipe.separator_value(i, x)?);
            Some(e)
        };
        match (ext(a), ext(b)) {
            (Some(ea), Some(eb)) if parallel_offset(&ea, &eb, Step::Any).is_none() => {}
            _ => return Some(format!("separator for pair {:?} does not separate", s.pair)),
        }
    }
    for (k, v) in out.op.entries() {
        if out.recipe.eval(k) != Some(v) {
            return Some(format!("recipe disagrees with the table at {k:?}"));
        }
    }
    if !pol_sn_member(&out.op, n_star) {
        return Some(format!("result is not in Pol(s^{n_star})"));
    }
    None
}
