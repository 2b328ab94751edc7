//! Congruences of the chain `([0, N), max)` and cut sets.
//!
//! Congruences of a chain under `max` are the partitions into intervals.
//! The class containing `N-1` stands in for the infinite tail of `(ℕ, max)`,
//! so it contributes no cut point; this makes the map to subsets of
//! `[0, N-1)` a bijection.

use super::{Congruence, SemilatticeError};
use crate::ops::{Subset, MAX_BASE};

/// `A_θ`: maxima of all classes except the one containing `N-1`.
pub fn interval_partition_to_set(n: usize, theta: &Congruence) -> Result<Subset, SemilatticeError> {
    if theta.size() != n {
        return Err(SemilatticeError::SizeMismatch {
            expected: n,
            got: theta.size(),
        });
    }
    let mut cuts = Subset::EMPTY;
    for block in theta.blocks() {
        let (lo, hi) = (block[0], block[block.len() - 1]);
        if hi - lo + 1 != block.len() {
            return Err(SemilatticeError::NotInterval(theta.to_string()));
        }
        if hi != n - 1 {
            cuts.insert(hi);
        }
    }
    Ok(cuts)
}

/// `θ(A)`: `k` and `m > k` are related iff no `a ∈ A` has `k ≤ a < m`.
pub fn set_to_interval_partition(n: usize, cuts: Subset) -> Result<Congruence, SemilatticeError> {
    if n == 0 || n > MAX_BASE {
        return Err(crate::ops::OpError::BadBase(n).into());
    }
    if let Some(bad) = cuts.iter().find(|&a| a + 1 >= n) {
        return Err(SemilatticeError::CutOutOfRange(bad, n - 1));
    }
    let mut label = 0;
    let labels: Vec<usize> = (0..n)
        .map(|x| {
            let l = label;
            if cuts.contains(x) {
                label += 1;
            }
            l
        })
        .collect();
    Ok(Congruence::from_labels(&labels))
}

/// All `2^(N-1)` interval partitions of `[0, N)`, ordered by cut set.
pub fn interval_partitions(n: usize) -> Result<Vec<Congruence>, SemilatticeError> {
    if n == 0 || n > MAX_BASE {
        return Err(crate::ops::OpError::BadBase(n).into());
    }
    Subset::full(n - 1)
        .subsets()
        .map(|a| set_to_interval_partition(n, a))
        .collect()
}
