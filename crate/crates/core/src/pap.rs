//! Partition affinity propagation.
//!
//! The (optionally shuffled) index range is cut into `k` contiguous blocks.
//! AP runs on every diagonal block of the similarity matrix, the block
//! availability matrices are laid out on the diagonal of an otherwise zero
//! matrix, and a full AP run starts from that matrix.

use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{run_affinity_propagation, ApConfig, ClusteringResult};
use crate::error::{invalid, Error, Result};
use crate::matrix::SquareMatrix;
use crate::similarity::SimilarityMatrix;

/// Seed used for the index shuffle when none is configured.
pub const DEFAULT_SHUFFLE_SEED: u64 = 0x5041_5031;

/// Contiguous blocks: `k - 1` blocks of `m = n / k` points and a last block of
/// `n - m (k - 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    pub k: usize,
    pub m: usize,
    pub blocks: Vec<Range<usize>>,
}

impl PartitionPlan {
    pub fn n(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(ExactSizeIterator::len).collect()
    }
}

pub fn partition_blocks(n: usize, k: usize) -> Result<PartitionPlan> {
    if k < 2 {
        return Err(invalid("k", "at least two blocks are required"));
    }
    if k > n {
        return Err(invalid("k", "cannot exceed the number of points"));
    }
    let m = n / k;
    let mut blocks: Vec<Range<usize>> = (0..k - 1).map(|b| b * m..(b + 1) * m).collect();
    blocks.push((k - 1) * m..n);
    Ok(PartitionPlan { k, m, blocks })
}

/// Outcome of checking `1 < k < n / (4C)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum KCheck {
    Ok,
    /// `k` is not below `bound = n / (4C)`. The run still proceeds.
    AboveBound {
        bound: f64,
    },
}

pub fn validate_k(n: usize, k: usize, expected_max_clusters: usize) -> KCheck {
    let bound = n as f64 / (4.0 * expected_max_clusters as f64);
    if (k as f64) < bound {
        KCheck::Ok
    } else {
        KCheck::AboveBound { bound }
    }
}

/// Places each block availability matrix on the diagonal of a zero matrix.
pub fn assemble_block_availability(blocks: &[SquareMatrix], plan: &PartitionPlan) -> Result<SquareMatrix> {
    if blocks.len() != plan.blocks.len() {
        return Err(Error::DimensionMismatch {
            expected: plan.blocks.len(),
            found: blocks.len(),
        });
    }
    let mut out = SquareMatrix::zeros(plan.n());
    for (a, range) in blocks.iter().zip(&plan.blocks) {
        if a.n() != range.len() {
            return Err(Error::DimensionMismatch {
                expected: range.len(),
                found: a.n(),
            });
        }
        for (bi, i) in range.clone().enumerate() {
            out.row_mut(i)[range.clone()].copy_from_slice(a.row(bi));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PapConfig {
    pub k: usize,
    /// Expected maximum cluster count `C`; enables the `k < n / (4C)` check.
    pub expected_max_clusters: Option<usize>,
    /// Seed of the index permutation applied before partitioning; `None`
    /// keeps the input order.
    pub shuffle_seed: Option<u64>,
    /// Configuration of the per-block runs.
    pub inner: ApConfig,
    /// Configuration of the warm-started full run.
    pub outer: ApConfig,
}

impl Default for PapConfig {
    fn default() -> Self {
        Self {
            k: 4,
            expected_max_clusters: None,
            shuffle_seed: Some(DEFAULT_SHUFFLE_SEED),
            inner: ApConfig::default(),
            outer: ApConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PapRun {
    pub result: ClusteringResult,
    pub plan: PartitionPlan,
    pub k_check: Option<KCheck>,
    /// Iterations of each block run, in block order.
    pub block_iterations: Vec<usize>,
    /// Iterations of the warm-started full run.
    pub outer_iterations: usize,
    pub message_ops: u64,
    /// Net similarity per outer iteration, when the outer config traces.
    pub netsim_trace: Vec<f64>,
}

impl PapRun {
    pub fn block_iterations_max(&self) -> usize {
        self.block_iterations.iter().copied().max().unwrap_or(0)
    }

    pub fn block_iterations_sum(&self) -> usize {
        self.block_iterations.iter().sum()
    }
}

pub fn pap_cluster(s: &SimilarityMatrix, cfg: &PapConfig) -> Result<PapRun> {
    cfg.inner.validate()?;
    cfg.outer.validate()?;
    let n = s.n();
    if n == 1 {
        return single_point(s, cfg);
    }
    let plan = partition_blocks(n, cfg.k)?;
    let k_check = cfg.expected_max_clusters.map(|c| validate_k(n, cfg.k, c.max(1)));

    let order: Vec<usize> = match cfg.shuffle_seed {
        Some(seed) => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            order
        }
        None => (0..n).collect(),
    };
    let permuted = s.select(&order);

    let mut block_availability = Vec::with_capacity(plan.k);
    let mut block_iterations = Vec::with_capacity(plan.k);
    let mut message_ops = 0;
    for range in &plan.blocks {
        let local: Vec<usize> = range.clone().collect();
        let run = run_affinity_propagation(&permuted.select(&local), &cfg.inner, None)?;
        block_iterations.push(run.result.iterations);
        message_ops += run.message_ops;
        block_availability.push(run.state.availabilities);
    }
    let warm = assemble_block_availability(&block_availability, &plan)?;
    drop(block_availability);

    let outer = run_affinity_propagation(&permuted, &cfg.outer, Some(&warm))?;
    message_ops += outer.message_ops;
    let result = unpermute(s, &outer.result, &order)?;
    Ok(PapRun {
        result,
        plan,
        k_check,
        block_iterations,
        outer_iterations: outer.result.iterations,
        message_ops,
        netsim_trace: outer.netsim_trace,
    })
}

/// A single point cannot be partitioned; it is its own exemplar.
fn single_point(s: &SimilarityMatrix, cfg: &PapConfig) -> Result<PapRun> {
    let outer = run_affinity_propagation(s, &cfg.outer, None)?;
    Ok(PapRun {
        result: outer.result,
        plan: PartitionPlan {
            k: 1,
            m: 1,
            blocks: alloc::vec![0..1],
        },
        k_check: None,
        block_iterations: Vec::new(),
        outer_iterations: 0,
        message_ops: 0,
        netsim_trace: outer.netsim_trace,
    })
}

/// Maps a result computed on `s.select(order)` back to original indices.
fn unpermute(s: &SimilarityMatrix, permuted: &ClusteringResult, order: &[usize]) -> Result<ClusteringResult> {
    let exemplars: Vec<usize> = permuted.exemplars.iter().map(|&e| order[e]).collect();
    let mut result = ClusteringResult::from_exemplars(s, &exemplars)?;
    result.iterations = permuted.iterations;
    result.converged = permuted.converged;
    Ok(result)
}
