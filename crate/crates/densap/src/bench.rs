//! Seeded benchmark suites.
//!
//! Each suite generates `random2d` data with the run's seed, uses negative
//! squared Euclidean similarities with median preferences, and compares a
//! variant against full AP on the same matrix. Seeds run in parallel; output
//! order is fixed.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use densap_core::datasets::{generate, DatasetKind, GenSpec};
use densap_core::metrics::{agreement, association_rates};
use densap_core::pap::{validate_k, KCheck};
use densap_core::{
    install_preferences, lap_cluster, neg_sq_euclidean, pap_cluster, ApConfig, ClusteringResult, LapConfig, PapConfig,
    PreferenceSpec, SimilarityMatrix,
};
use rayon::prelude::*;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    PapIterations,
    LapAccuracy,
    PapKSweep,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::PapIterations, Suite::LapAccuracy, Suite::PapKSweep];

    pub fn name(self) -> &'static str {
        match self {
            Suite::PapIterations => "pap-iterations",
            Suite::LapAccuracy => "lap-accuracy",
            Suite::PapKSweep => "pap-k-sweep",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| format!("unknown suite {s:?} (expected pap-iterations, lap-accuracy or pap-k-sweep)"))
    }
}

/// Random 2D points of size `n` for `seed` as a similarity matrix with median
/// preferences.
pub fn random2d_similarities(n: usize, seed: u64) -> Result<SimilarityMatrix> {
    let points = generate(&GenSpec::new(DatasetKind::Random2d, n, seed))?;
    Ok(install_preferences(
        neg_sq_euclidean(&points)?,
        &PreferenceSpec::Median,
    )?)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

fn relative_gap(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// One benchmark run: a parameter value, a seed and numeric columns.
pub trait BenchRecord {
    const PARAM: &'static str;
    const COLUMNS: &'static [&'static str];
    fn param(&self) -> usize;
    fn seed(&self) -> u64;
    fn values(&self) -> Vec<f64>;
}

/// Writes one `run` row per record and one `mean` row per parameter value,
/// in order of first appearance.
pub fn write_csv<R: BenchRecord, W: Write>(records: &[R], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["row", R::PARAM, "seed"];
    header.extend_from_slice(R::COLUMNS);
    w.write_record(&header)?;
    for r in records {
        let mut row = vec!["run".to_owned(), r.param().to_string(), r.seed().to_string()];
        row.extend(r.values().iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    for (param, mean) in means(records) {
        let mut row = vec!["mean".to_owned(), param.to_string(), String::new()];
        row.extend(mean.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Column means per parameter value, in order of first appearance.
pub fn means<R: BenchRecord>(records: &[R]) -> Vec<(usize, Vec<f64>)> {
    let mut params: Vec<usize> = Vec::new();
    for r in records {
        if !params.contains(&r.param()) {
            params.push(r.param());
        }
    }
    params
        .into_iter()
        .map(|p| {
            let group: Vec<Vec<f64>> = records.iter().filter(|r| r.param() == p).map(R::values).collect();
            let mut sum = vec![0.0; R::COLUMNS.len()];
            for values in &group {
                sum.iter_mut().zip(values).for_each(|(s, v)| *s += v);
            }
            (p, sum.into_iter().map(|s| s / group.len() as f64).collect())
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct PapIterationsRecord {
    pub n: usize,
    pub seed: u64,
    pub k: usize,
    pub ap: ClusteringResult,
    pub ap_seconds: f64,
    pub pap: ClusteringResult,
    pub pap_seconds: f64,
    pub block_iterations: Vec<usize>,
    pub outer_iterations: usize,
}

impl PapIterationsRecord {
    pub fn netsim_gap(&self) -> f64 {
        relative_gap(self.pap.netsim, self.ap.netsim)
    }
}

impl BenchRecord for PapIterationsRecord {
    const PARAM: &'static str = "n";
    const COLUMNS: &'static [&'static str] = &[
        "k",
        "ap_iterations",
        "ap_converged",
        "ap_clusters",
        "ap_netsim",
        "ap_seconds",
        "pap_block_iterations_max",
        "pap_block_iterations_sum",
        "pap_outer_iterations",
        "pap_converged",
        "pap_clusters",
        "pap_netsim",
        "pap_seconds",
        "netsim_relative_gap",
        "agreement_with_ap",
    ];

    fn param(&self) -> usize {
        self.n
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn values(&self) -> Vec<f64> {
        vec![
            self.k as f64,
            self.ap.iterations as f64,
            flag(self.ap.converged),
            self.ap.num_clusters() as f64,
            self.ap.netsim,
            self.ap_seconds,
            self.block_iterations.iter().copied().max().unwrap_or(0) as f64,
            self.block_iterations.iter().sum::<usize>() as f64,
            self.outer_iterations as f64,
            flag(self.pap.converged),
            self.pap.num_clusters() as f64,
            self.pap.netsim,
            self.pap_seconds,
            self.netsim_gap(),
            agreement(&self.pap.idx, &self.ap.idx).unwrap_or(f64::NAN),
        ]
    }
}

/// Full AP against PAP with `k` blocks, for every size and seed.
pub fn pap_iterations(sizes: &[usize], k: usize, seeds: &[u64]) -> Result<Vec<PapIterationsRecord>> {
    let jobs: Vec<(usize, u64)> = sizes.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    jobs.into_par_iter()
        .map(|(n, seed)| {
            let s = random2d_similarities(n, seed)?;
            let (ap, ap_seconds) = timed(|| densap_core::affinity_propagation(&s, &ApConfig::default(), None));
            let cfg = PapConfig {
                k,
                ..PapConfig::default()
            };
            let (pap, pap_seconds) = timed(|| pap_cluster(&s, &cfg));
            let pap = pap?;
            Ok(PapIterationsRecord {
                n,
                seed,
                k,
                ap: ap?,
                ap_seconds,
                block_iterations: pap.block_iterations,
                outer_iterations: pap.outer_iterations,
                pap: pap.result,
                pap_seconds,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct LapAccuracyRecord {
    pub landmarks: usize,
    pub seed: u64,
    pub ap: ClusteringResult,
    pub lap: ClusteringResult,
    pub lap_seconds: f64,
    pub refine_sweeps: usize,
    pub refine_trace: Vec<f64>,
    pub agreement: f64,
}

impl LapAccuracyRecord {
    /// Position of `agreement_with_ap` in [`BenchRecord::values`].
    pub const AGREEMENT_COLUMN: usize = 0;
}

impl BenchRecord for LapAccuracyRecord {
    const PARAM: &'static str = "landmarks";
    const COLUMNS: &'static [&'static str] = &[
        "agreement_with_ap",
        "ap_clusters",
        "ap_netsim",
        "lap_clusters",
        "lap_netsim",
        "lap_iterations",
        "lap_converged",
        "refine_sweeps",
        "lap_seconds",
    ];

    fn param(&self) -> usize {
        self.landmarks
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn values(&self) -> Vec<f64> {
        vec![
            self.agreement,
            self.ap.num_clusters() as f64,
            self.ap.netsim,
            self.lap.num_clusters() as f64,
            self.lap.netsim,
            self.lap.iterations as f64,
            flag(self.lap.converged),
            self.refine_sweeps as f64,
            self.lap_seconds,
        ]
    }
}

/// LAP at each landmark count against full AP; records are ordered by
/// landmark count, then seed.
pub fn lap_accuracy(n: usize, landmarks: &[usize], seeds: &[u64]) -> Result<Vec<LapAccuracyRecord>> {
    let per_seed: Vec<Vec<LapAccuracyRecord>> = seeds
        .par_iter()
        .map(|&seed| {
            let s = random2d_similarities(n, seed)?;
            let ap = densap_core::affinity_propagation(&s, &ApConfig::default(), None)?;
            landmarks
                .iter()
                .map(|&l| {
                    let cfg = LapConfig {
                        num_landmarks: l,
                        seed,
                        ..LapConfig::default()
                    };
                    let (run, lap_seconds) = timed(|| lap_cluster(&s, &cfg));
                    let run = run?;
                    Ok(LapAccuracyRecord {
                        landmarks: l,
                        seed,
                        agreement: agreement(&run.result.idx, &ap.idx)?,
                        ap: ap.clone(),
                        lap: run.result,
                        lap_seconds,
                        refine_sweeps: run.refine_sweeps,
                        refine_trace: run.refine_trace,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut records: Vec<LapAccuracyRecord> = per_seed.into_iter().flatten().collect();
    records.sort_by_key(|r| {
        (
            landmarks.iter().position(|&l| l == r.landmarks),
            seeds.iter().position(|&s| s == r.seed),
        )
    });
    Ok(records)
}

#[derive(Debug, Clone)]
pub struct PapKSweepRecord {
    pub k: usize,
    pub seed: u64,
    pub ap: ClusteringResult,
    pub pap: ClusteringResult,
    pub block_iterations_max: usize,
    pub outer_iterations: usize,
    pub pap_seconds: f64,
    /// `n / (4C)` with `C` the full-AP cluster count.
    pub k_bound: f64,
    pub tar: f64,
    pub far: f64,
}

impl BenchRecord for PapKSweepRecord {
    const PARAM: &'static str = "k";
    const COLUMNS: &'static [&'static str] = &[
        "ap_iterations",
        "ap_clusters",
        "ap_netsim",
        "pap_block_iterations_max",
        "pap_outer_iterations",
        "pap_clusters",
        "pap_netsim",
        "pap_seconds",
        "k_bound",
        "k_above_bound",
        "tar_vs_ap",
        "far_vs_ap",
    ];

    fn param(&self) -> usize {
        self.k
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn values(&self) -> Vec<f64> {
        vec![
            self.ap.iterations as f64,
            self.ap.num_clusters() as f64,
            self.ap.netsim,
            self.block_iterations_max as f64,
            self.outer_iterations as f64,
            self.pap.num_clusters() as f64,
            self.pap.netsim,
            self.pap_seconds,
            self.k_bound,
            flag(self.k as f64 >= self.k_bound),
            self.tar,
            self.far,
        ]
    }
}

/// PAP over several block counts on one size; association rates treat the
/// full-AP labels as truth. Records are ordered by `k`, then seed.
pub fn pap_k_sweep(n: usize, ks: &[usize], seeds: &[u64]) -> Result<Vec<PapKSweepRecord>> {
    let per_seed: Vec<Vec<PapKSweepRecord>> = seeds
        .par_iter()
        .map(|&seed| {
            let s = random2d_similarities(n, seed)?;
            let ap = densap_core::affinity_propagation(&s, &ApConfig::default(), None)?;
            let clusters = ap.num_clusters();
            ks.iter()
                .map(|&k| {
                    let cfg = PapConfig {
                        k,
                        expected_max_clusters: Some(clusters),
                        ..PapConfig::default()
                    };
                    let (run, pap_seconds) = timed(|| pap_cluster(&s, &cfg));
                    let run = run?;
                    let k_bound = match validate_k(n, k, clusters) {
                        KCheck::Ok => n as f64 / (4.0 * clusters as f64),
                        KCheck::AboveBound { bound } => bound,
                    };
                    let rates = association_rates(&run.result.idx, &ap.idx)?;
                    Ok(PapKSweepRecord {
                        k,
                        seed,
                        ap: ap.clone(),
                        block_iterations_max: run.block_iterations_max(),
                        outer_iterations: run.outer_iterations,
                        pap: run.result,
                        pap_seconds,
                        k_bound,
                        tar: rates.tar,
                        far: rates.far,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut records: Vec<PapKSweepRecord> = per_seed.into_iter().flatten().collect();
    records.sort_by_key(|r| {
        (
            ks.iter().position(|&k| k == r.k),
            seeds.iter().position(|&s| s == r.seed),
        )
    });
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for suite in Suite::ALL {
            assert_eq!(suite.name().parse::<Suite>(), Ok(suite));
        }
        assert!("lap".parse::<Suite>().is_err());
    }

    #[test]
    fn csv_has_run_and_mean_rows() {
        let records = lap_accuracy(60, &[10, 20], &[0, 1, 2]).unwrap();
        assert_eq!(
            records.iter().map(|r| (r.landmarks, r.seed)).collect::<Vec<_>>(),
            vec![(10, 0), (10, 1), (10, 2), (20, 0), (20, 1), (20, 2)]
        );
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 6 + 2);
        assert!(lines[0].starts_with("row,landmarks,seed,agreement_with_ap,"));
        assert!(lines[7].starts_with("mean,10,,"));
        let expected = records[..3].iter().map(|r| r.agreement).sum::<f64>() / 3.0;
        assert_eq!(means(&records)[0].1[0], expected);
    }

    #[test]
    fn sweep_rows_are_ordered_by_parameter() {
        let records = pap_k_sweep(40, &[4, 2], &[3, 1]).unwrap();
        let order: Vec<(usize, u64)> = records.iter().map(|r| (r.k, r.seed)).collect();
        assert_eq!(order, vec![(4, 3), (4, 1), (2, 3), (2, 1)]);
        assert!(records.iter().all(|r| r.pap.is_valid_configuration()));
        let its = pap_iterations(&[30, 40], 2, &[5]).unwrap();
        assert_eq!(its.iter().map(|r| r.n).collect::<Vec<_>>(), vec![30, 40]);
    }
}
