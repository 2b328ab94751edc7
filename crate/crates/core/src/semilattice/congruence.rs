use super::{Congruence, CongruenceOrder, Relation, Semilattice, SemilatticeError};

/// All congruences of `s`, by filtering every set partition.
///
/// Output is sorted finest first (more classes first), ties broken by the
/// canonical labelling, so it is a linear extension of refinement.
pub fn enumerate_congruences(
    s: &Semilattice,
    bound: usize,
) -> Result<Vec<Congruence>, SemilatticeError> {
    let q = s.size();
    if q > bound {
        return Err(SemilatticeError::TooLarge { size: q, bound });
    }
    let mut out = Vec::new();
    for_each_partition(q, |labels| {
        let c = Congruence::from_labels(labels);
        if c.compatibility_violation(s).is_none() {
            out.push(c);
        }
    });
    out.sort_by(|a, b| {
        b.class_count()
            .cmp(&a.class_count())
            .then_with(|| a.labels().cmp(b.labels()))
    });
    Ok(out)
}

/// Calls `f` on every restricted growth string of length `n`.
pub(crate) fn for_each_partition(n: usize, mut f: impl FnMut(&[usize])) {
    if n == 0 {
        return;
    }
    let mut labels = vec![0usize; n];
    // max label used in labels[..i]
    let mut maxes = vec![0usize; n];
    loop {
        f(&labels);
        let mut i = n - 1;
        loop {
            if i == 0 {
                return;
            }
            if labels[i] <= maxes[i - 1] {
                labels[i] += 1;
                maxes[i] = maxes[i - 1].max(labels[i]);
                for j in i + 1..n {
                    labels[j] = 0;
                    maxes[j] = maxes[i];
                }
                break;
            }
            i -= 1;
        }
    }
}

/// `θ_R = R ∩ R⁻¹`.
pub fn order_to_congruence(order: &CongruenceOrder) -> Congruence {
    let q = order.size();
    let labels: Vec<usize> = (0..q)
        .map(|a| {
            (0..q)
                .find(|&b| order.holds(a, b) && order.holds(b, a))
                .expect("congruence orders are reflexive")
        })
        .collect();
    Congruence::from_labels(&labels)
}

/// `x ⊑ y  iff  x/θ ≤ y/θ`, i.e. `(x ∨ y) θ y`.
pub fn congruence_to_order(s: &Semilattice, theta: &Congruence) -> CongruenceOrder {
    let q = s.size();
    CongruenceOrder::new_unchecked(Relation::from_fn(q, |x, y| {
        theta.related(s.join(x, y), y)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell(n: usize) -> usize {
        let mut count = 0;
        for_each_partition(n, |_| count += 1);
        count
    }

    #[test]
    fn partition_counts() {
        assert_eq!(bell(1), 1);
        assert_eq!(bell(3), 5);
        assert_eq!(bell(5), 52);
        assert_eq!(bell(8), 4140);
    }

    #[test]
    fn three_chain_has_four() {
        let s = Semilattice::chain(3).unwrap();
        let cons = enumerate_congruences(&s, 8).unwrap();
        assert_eq!(cons.len(), 4);
        assert!(!cons.contains(&Congruence::from_labels(&[0, 1, 0])));
        assert_eq!(cons[0], Congruence::discrete(3));
        assert_eq!(cons[3], Congruence::total(3));
    }

    #[test]
    fn small_cases() {
        assert_eq!(enumerate_congruences(&Semilattice::chain(1).unwrap(), 8).unwrap().len(), 1);
        assert_eq!(enumerate_congruences(&Semilattice::chain(2).unwrap(), 8).unwrap().len(), 2);
        assert!(matches!(
            enumerate_congruences(&Semilattice::chain(9).unwrap(), 8),
            Err(SemilatticeError::TooLarge { size: 9, bound: 8 })
        ));
    }

    #[test]
    fn extreme_orders() {
        let s = Semilattice::chain(4).unwrap();
        let leq = CongruenceOrder::order_of(&s);
        assert_eq!(order_to_congruence(&leq), Congruence::discrete(4));
        let all = CongruenceOrder::new(&s, Relation::from_fn(4, |_, _| true)).unwrap();
        assert_eq!(order_to_congruence(&all), Congruence::total(4));
        assert_eq!(congruence_to_order(&s, &Congruence::discrete(4)), leq);
    }

    #[test]
    fn orders_of_congruences_validate() {
        let s = Semilattice::chain(4).unwrap();
        for theta in enumerate_congruences(&s, 8).unwrap() {
            let r = congruence_to_order(&s, &theta);
            assert!(CongruenceOrder::new(&s, r.relation().clone()).is_ok());
            assert_eq!(order_to_congruence(&r), theta);
        }
    }
}
