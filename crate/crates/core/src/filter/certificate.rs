use super::FilterError;
use crate::ops::{diagonal, fix_set, Certificate, CompositionTree, OpTable, Subset};

/// Some unary operation with the given fix-set: the identity on `fix`, and
/// `x -> x+1 mod q` elsewhere.
pub fn unary_with_fix(base: usize, fix: Subset) -> Result<OpTable, FilterError> {
    if base == 1 && fix.is_empty() {
        return Err(FilterError::NoSuchFix(base, fix));
    }
    Ok(OpTable::from_fn(base, 1, |t| {
        let x = t[0] as usize;
        if fix.contains(x) {
            x as u8
        } else {
            ((x + 1) % base) as u8
        }
    })?)
}

fn check_unary(f: &OpTable) -> Result<(), FilterError> {
    if f.arity() == 1 {
        Ok(())
    } else {
        Err(FilterError::NotUnary)
    }
}

/// Shows `target ∈ cl(C3 ∪ {source})` for unary maps with
/// `fix(source) ⊆ fix(target)`.
///
/// Returns a certificate over `[H, source]` with tree `H(x, source(x))`,
/// where `H(x, y) = target(x)` if `x ≠ y` and `x` otherwise. `H` is
/// idempotent. The certificate is checked before it is returned.
pub fn dominate_certificate(target: &OpTable, source: &OpTable) -> Result<Certificate, FilterError> {
    check_unary(target)?;
    check_unary(source)?;
    if target.base() != source.base() {
        return Err(FilterError::BaseMismatch(target.base(), source.base()));
    }
    let (fs, ft) = (fix_set(source), fix_set(target));
    if let Some(x) = fs.difference(ft).min() {
        return Err(FilterError::NotDominated(x));
    }
    let h = OpTable::from_fn(target.base(), 2, |t| {
        if t[0] != t[1] {
            target.table()[t[0] as usize]
        } else {
            t[0]
        }
    })?;
    debug_assert!(h.is_idempotent());
    let x = CompositionTree::proj(1, 1);
    let cert = Certificate {
        generators: vec![h, source.clone()],
        tree: CompositionTree::apply(0, vec![x.clone(), CompositionTree::apply(1, vec![x])]),
    };
    assert!(cert.certifies(target), "H(x, source(x)) must equal target(x)");
    Ok(cert)
}

/// Shows `f ∈ cl(C3 ∪ {u})` for a unary `u` with `fix(u) = fix(f)`.
///
/// Returns a certificate over `[H, u]` with tree `H(x1, .., xn, u(x1))`,
/// where `H(x, y) = x1` if `x1 = .. = xn = y` and `f(x)` otherwise.
pub fn lift_certificate(f: &OpTable, u: &OpTable) -> Result<Certificate, FilterError> {
    check_unary(u)?;
    if f.base() != u.base() {
        return Err(FilterError::BaseMismatch(f.base(), u.base()));
    }
    let (ff, fu) = (fix_set(f), fix_set(u));
    if ff != fu {
        return Err(FilterError::FixMismatch {
            expected: ff,
            got: fu,
        });
    }
    let n = f.arity();
    let h = OpTable::from_fn(f.base(), n + 1, |t| {
        if t.iter().all(|&v| v == t[0]) {
            t[0]
        } else {
            f.eval(&t[..n])
        }
    })?;
    debug_assert!(h.is_idempotent());
    let mut args: Vec<CompositionTree> = (1..=n).map(|i| CompositionTree::proj(n, i)).collect();
    args.push(CompositionTree::apply(1, vec![CompositionTree::proj(n, 1)]));
    let cert = Certificate {
        generators: vec![h, u.clone()],
        tree: CompositionTree::apply(0, args),
    };
    assert!(cert.certifies(f), "H(x, u(x1)) must equal f(x)");
    Ok(cert)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MembershipCertificate {
    /// A term over idempotent operations and the fixed generator.
    Certified(Certificate),
    /// A point of `A` that `f` does not fix; no member of
    /// `cl(C3 ∪ {g})` can move it.
    Refused { witness: usize },
}

/// Decides `f ∈ cl(C3 ∪ {g})` where `fix(g) = A`, returning a term when it is.
///
/// For `A ⊆ fix(f)` the term is `H(x, H'(x1, g(x1)))`: `H'` turns `g` into
/// the diagonal of `f` and `H` lifts the diagonal to `f`. Idempotent `f`
/// needs no `g`. Generators in the certificate are `[g, H', H]`, or `[f]`
/// alone for idempotent `f`.
pub fn membership_by_certificate(
    f: &OpTable,
    fix: Subset,
    g: &OpTable,
) -> Result<MembershipCertificate, FilterError> {
    check_unary(g)?;
    if f.base() != g.base() {
        return Err(FilterError::BaseMismatch(f.base(), g.base()));
    }
    let gf = fix_set(g);
    if gf != fix {
        return Err(FilterError::FixMismatch {
            expected: fix,
            got: gf,
        });
    }
    let ff = fix_set(f);
    if let Some(x) = fix.difference(ff).min() {
        return Ok(MembershipCertificate::Refused { witness: x });
    }
    if ff == Subset::full(f.base()) {
        return Ok(MembershipCertificate::Certified(Certificate {
            generators: vec![f.clone()],
            tree: CompositionTree::Generator { index: 0 },
        }));
    }
    let diag = diagonal(f);
    let unary = dominate_certificate(&diag, g)?;
    let h_prime = unary.generators[0].clone();
    let n = f.arity();
    let x1 = CompositionTree::proj(n, 1);
    // H'(x1, g(x1)) as an n-ary term
    let diag_term = CompositionTree::apply(1, vec![x1.clone(), CompositionTree::apply(0, vec![x1])]);
    let cert = if n == 1 {
        Certificate {
            generators: vec![g.clone(), h_prime],
            tree: diag_term,
        }
    } else {
        let lift = lift_certificate(f, &diag)?;
        let mut args: Vec<CompositionTree> = (1..=n).map(|i| CompositionTree::proj(n, i)).collect();
        args.push(diag_term);
        Certificate {
            generators: vec![g.clone(), h_prime, lift.generators[0].clone()],
            tree: CompositionTree::apply(2, args),
        }
    };
    assert!(cert.certifies(f), "membership term must evaluate to f");
    Ok(MembershipCertificate::Certified(cert))
}
