//! Filter clones `C_F = {f : fix(f) ∈ F}` above the idempotent clone.
//!
//! On a finite base every filter is principal, so a filter is stored as its
//! generating set `A`: the filter is `{B : A ⊆ B}` and `A = ∅` is the
//! improper filter (the whole power set).

mod certificate;
mod ideal;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use certificate::{
    dominate_certificate, lift_certificate, membership_by_certificate, unary_with_fix,
    MembershipCertificate,
};
pub use ideal::{ideal_of_unary, IdealMember, IdealStep, NixIdeal};

use crate::ops::{fix_set, OpError, OpTable, Subset, MAX_BASE};

/// Default base-size limit for [`filter_lattice`].
pub const DEFAULT_LATTICE_BOUND: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FilterError {
    #[error(transparent)]
    Op(#[from] OpError),
    #[error("fix({got:?}) must equal {expected:?}")]
    FixMismatch { expected: Subset, got: Subset },
    #[error("fix-set inclusion fails at {0}")]
    NotDominated(usize),
    #[error("expected a unary operation")]
    NotUnary,
    #[error("base sizes differ: {0} vs {1}")]
    BaseMismatch(usize, usize),
    #[error("base size {size} exceeds the lattice bound {bound}")]
    TooLarge { size: usize, bound: usize },
    #[error("no unary operation on a {0}-element base has fix-set {1:?}")]
    NoSuchFix(usize, Subset),
}

/// The filter of all supersets of `generator` inside `{0, .., base-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrincipalFilter {
    base: usize,
    generator: Subset,
}

impl PrincipalFilter {
    pub fn new(base: usize, generator: Subset) -> Result<Self, FilterError> {
        if base == 0 || base > MAX_BASE {
            return Err(OpError::BadBase(base).into());
        }
        if !generator.is_subset(Subset::full(base)) {
            return Err(OpError::BadBase(base).into());
        }
        Ok(PrincipalFilter { base, generator })
    }

    /// The improper filter, all subsets.
    pub fn improper(base: usize) -> Self {
        PrincipalFilter {
            base,
            generator: Subset::EMPTY,
        }
    }

    /// `{X}`, whose clone is the idempotent clone.
    pub fn top(base: usize) -> Self {
        PrincipalFilter {
            base,
            generator: Subset::full(base),
        }
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn generator(&self) -> Subset {
        self.generator
    }

    pub fn is_improper(&self) -> bool {
        self.generator.is_empty()
    }

    /// Ultrafilters on a finite set are generated by a single point.
    pub fn is_ultrafilter(&self) -> bool {
        self.generator.len() == 1
    }

    pub fn contains_set(&self, b: Subset) -> bool {
        self.generator.is_subset(b)
    }

    /// `self ⊆ other` as families of sets.
    pub fn is_subfilter_of(&self, other: &PrincipalFilter) -> bool {
        other.generator.is_subset(self.generator)
    }
}

/// `f ∈ C_F`.
pub fn cf_member(f: &OpTable, filter: &PrincipalFilter) -> bool {
    f.base() == filter.base() && filter.contains_set(fix_set(f))
}

/// The filter whose clone is generated by the idempotent operations and
/// `gens`: generated by the intersection of the generators' fix-sets.
pub fn filter_of_clone_generators(base: usize, gens: &[OpTable]) -> Result<PrincipalFilter, FilterError> {
    let mut a = Subset::full(base);
    for g in gens {
        if g.base() != base {
            return Err(FilterError::BaseMismatch(base, g.base()));
        }
        a = a.intersection(fix_set(g));
    }
    PrincipalFilter::new(base, a)
}

/// All filters on a finite base with their inclusion order and covers.
#[derive(Debug, Clone, Serialize)]
pub struct FilterLattice {
    pub base: usize,
    /// One filter per subset, indexed by the generator's bitmask.
    pub filters: Vec<PrincipalFilter>,
    /// `(lower, upper)` index pairs where `upper` covers `lower`.
    pub covers: Vec<(usize, usize)>,
}

impl FilterLattice {
    pub fn ultrafilters(&self) -> impl Iterator<Item = &PrincipalFilter> {
        self.filters.iter().filter(|f| f.is_ultrafilter())
    }

    /// Maximal proper filters, read off the cover relation.
    pub fn coatoms(&self) -> Vec<usize> {
        let top = 0; // generator ∅, the improper filter
        self.covers
            .iter()
            .filter(|&&(_, upper)| upper == top)
            .map(|&(lower, _)| lower)
            .collect()
    }

    /// Covers predicted by one-point extensions: `F_{A ∪ {p}} ⋖ F_A` for
    /// `p ∉ A`.
    pub fn one_point_extensions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in Subset::full(self.base).subsets() {
            for p in a.complement(self.base).iter() {
                out.push((a.with(p).bits() as usize, a.bits() as usize));
            }
        }
        out.sort_unstable();
        out
    }

    /// Labels such as `⟨0,2⟩` (generator) for diagrams.
    pub fn labels(&self) -> Vec<String> {
        self.filters
            .iter()
            .map(|f| {
                let items: Vec<String> = f.generator().iter().map(|x| x.to_string()).collect();
                format!("<{}>", items.join(","))
            })
            .collect()
    }
}

/// Enumerates the `2^q` filters and computes covers from the order alone.
pub fn filter_lattice(base: usize, bound: usize) -> Result<FilterLattice, FilterError> {
    if base > bound {
        return Err(FilterError::TooLarge { size: base, bound });
    }
    let filters: Vec<PrincipalFilter> = Subset::full(base)
        .subsets()
        .map(|a| PrincipalFilter::new(base, a))
        .collect::<Result<_, _>>()?;
    let n = filters.len();
    let lt = |i: usize, j: usize| i != j && filters[i].is_subfilter_of(&filters[j]);
    let mut covers = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if lt(i, j) && !(0..n).any(|k| lt(i, k) && lt(k, j)) {
                covers.push((i, j));
            }
        }
    }
    covers.sort_unstable();
    Ok(FilterLattice {
        base,
        filters,
        covers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership() {
        let f = OpTable::from_fn(3, 2, |t| (t[0] + 1) % 3).unwrap();
        assert!(cf_member(&f, &PrincipalFilter::improper(3)));
        assert!(!cf_member(&f, &PrincipalFilter::top(3)));
        let max = OpTable::from_fn(3, 2, |t| t[0].max(t[1])).unwrap();
        assert!(cf_member(&max, &PrincipalFilter::top(3)));
        let d = OpTable::new(3, 1, vec![0, 0, 2]).unwrap();
        let f0 = PrincipalFilter::new(3, Subset::singleton(0)).unwrap();
        assert!(cf_member(&d, &f0));
    }

    #[test]
    fn generators_to_filter() {
        let max = OpTable::from_fn(3, 2, |t| t[0].max(t[1])).unwrap();
        assert_eq!(filter_of_clone_generators(3, &[max]).unwrap(), PrincipalFilter::top(3));
        let c0 = OpTable::constant(3, 0).unwrap();
        assert_eq!(
            filter_of_clone_generators(3, &[c0]).unwrap().generator(),
            Subset::singleton(0)
        );
        let g1 = OpTable::new(3, 1, vec![0, 1, 0]).unwrap();
        let g2 = OpTable::new(3, 1, vec![1, 1, 2]).unwrap();
        assert_eq!(
            filter_of_clone_generators(3, &[g1, g2]).unwrap().generator(),
            Subset::singleton(1)
        );
    }

    #[test]
    fn small_lattices() {
        let l1 = filter_lattice(1, 5).unwrap();
        assert_eq!(l1.filters.len(), 2);
        let l3 = filter_lattice(3, 5).unwrap();
        assert_eq!(l3.filters.len(), 8);
        assert_eq!(l3.ultrafilters().count(), 3);
        assert_eq!(l3.covers.len(), 12);
        assert_eq!(l3.covers, l3.one_point_extensions());
        let mut coatoms = l3.coatoms();
        coatoms.sort_unstable();
        assert_eq!(coatoms, vec![1, 2, 4]);
        assert!(matches!(filter_lattice(6, 5), Err(FilterError::TooLarge { .. })));
    }
}
