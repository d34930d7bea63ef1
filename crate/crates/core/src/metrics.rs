//! Pair-counting quality measures and an exhaustive-search oracle.
//!
//! All pair measures count unordered pairs `i < j`. They are computed from a
//! contingency table, so they run in `O(n log n)` rather than over all pairs.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::engine::ClusteringResult;
use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;

/// Largest input accepted by [`brute_force_optimum`].
pub const BRUTE_FORCE_MAX: usize = 20;

/// True and false association rates.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AssociationRates {
    /// Fraction of same-truth pairs that share a predicted cluster.
    pub tar: f64,
    /// Fraction of different-truth pairs that share a predicted cluster.
    pub far: f64,
}

/// Pair counts shared by the association and agreement measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    pub total: u64,
    /// Pairs co-clustered in the first labeling.
    pub same_first: u64,
    /// Pairs co-clustered in the second labeling.
    pub same_second: u64,
    /// Pairs co-clustered in both.
    pub same_both: u64,
}

fn pairs(c: u64) -> u64 {
    c * c.saturating_sub(1) / 2
}

impl PairCounts {
    pub fn new<L: Ord>(first: &[L], second: &[L]) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::DimensionMismatch {
                expected: first.len(),
                found: second.len(),
            });
        }
        let mut a: BTreeMap<&L, u64> = BTreeMap::new();
        let mut b: BTreeMap<&L, u64> = BTreeMap::new();
        let mut joint: BTreeMap<(&L, &L), u64> = BTreeMap::new();
        for (x, y) in first.iter().zip(second) {
            *a.entry(x).or_default() += 1;
            *b.entry(y).or_default() += 1;
            *joint.entry((x, y)).or_default() += 1;
        }
        Ok(Self {
            total: pairs(first.len() as u64),
            same_first: a.into_values().map(pairs).sum(),
            same_second: b.into_values().map(pairs).sum(),
            same_both: joint.into_values().map(pairs).sum(),
        })
    }
}

/// Association rates of `predicted` against `truth`.
///
/// With no same-truth pairs the true rate is 1; with no different-truth pairs
/// the false rate is 0.
pub fn association_rates<L: Ord>(predicted: &[L], truth: &[L]) -> Result<AssociationRates> {
    let c = PairCounts::new(truth, predicted)?;
    let tar = if c.same_first == 0 {
        1.0
    } else {
        c.same_both as f64 / c.same_first as f64
    };
    let different = c.total - c.same_first;
    let far = if different == 0 {
        0.0
    } else {
        (c.same_second - c.same_both) as f64 / different as f64
    };
    Ok(AssociationRates { tar, far })
}

/// Fraction of pairs on which two labelings agree (together in both or apart
/// in both). This is the Rand index; 1 for fewer than two points.
pub fn agreement<L: Ord>(predicted: &[L], reference: &[L]) -> Result<f64> {
    let c = PairCounts::new(predicted, reference)?;
    if c.total == 0 {
        return Ok(1.0);
    }
    let disagree = c.same_first + c.same_second - 2 * c.same_both;
    Ok((c.total - disagree) as f64 / c.total as f64)
}

/// Best configuration over every nonempty exemplar subset, each point joining
/// its most similar exemplar. Ties in net similarity go to the
/// lexicographically smallest subset.
pub fn brute_force_optimum(s: &SimilarityMatrix) -> Result<ClusteringResult> {
    let n = s.n();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge {
            n,
            max: BRUTE_FORCE_MAX,
        });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut subset = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        subset.clear();
        subset.extend((0..n).filter(|&i| mask & (1 << i) != 0));
        let netsim = subset_netsim(s, &subset, mask);
        let better = match &best {
            None => true,
            Some((v, e)) => netsim > *v || (netsim == *v && subset < *e),
        };
        if better {
            best = Some((netsim, subset.clone()));
        }
    }
    let (_, exemplars) = best.ok_or(Error::Empty("similarity matrix"))?;
    ClusteringResult::from_exemplars(s, &exemplars)
}

fn subset_netsim(s: &SimilarityMatrix, subset: &[usize], mask: u32) -> f64 {
    let mut dpsim = 0.0;
    for i in 0..s.n() {
        if mask & (1 << i) != 0 {
            continue;
        }
        let row = s.row(i);
        dpsim += subset.iter().map(|&e| row[e]).fold(f64::NEG_INFINITY, f64::max);
    }
    dpsim + subset.iter().map(|&e| s.preference(e)).sum::<f64>()
}
