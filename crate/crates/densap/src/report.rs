//! JSON run reports.
//!
//! A report echoes the configuration, carries the clustering result and a
//! per-phase summary, and optionally a net-similarity trace. Everything but
//! `elapsed_seconds` is a deterministic function of the inputs.

use std::io::Write;

use densap_core::lap::LevelReport;
use densap_core::pap::KCheck;
use densap_core::{ApConfig, ApRun, ClusteringResult, LapConfig, LapRun, PapConfig, PapRun};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum AlgorithmConfig {
    Ap(ApConfig),
    Pap(PapConfig),
    Lap(LapConfig),
}

impl AlgorithmConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmConfig::Ap(_) => "ap",
            AlgorithmConfig::Pap(_) => "pap",
            AlgorithmConfig::Lap(_) => "lap",
        }
    }
}

/// Where the similarities came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub source: String,
    pub n: usize,
    /// Preference rule, e.g. `median`, `uniform:-3`, `file`, `given`.
    pub preference: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseReport {
    Ap {
        iterations: usize,
    },
    Pap {
        block_sizes: Vec<usize>,
        block_iterations: Vec<usize>,
        block_iterations_max: usize,
        block_iterations_sum: usize,
        outer_iterations: usize,
        k_check: Option<KCheck>,
    },
    Lap {
        levels: Vec<LevelReport>,
        leftover_iterations: Option<usize>,
        refine_sweeps: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// `ap`, `outer` or `refine`.
    pub phase: String,
    /// Iteration number from 1, or refine sweep number with 0 for the
    /// starting configuration.
    pub step: usize,
    pub netsim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    pub input: InputSummary,
    pub config: AlgorithmConfig,
    pub result: ClusteringResult,
    pub num_clusters: usize,
    pub message_ops: u64,
    pub phases: PhaseReport,
    pub elapsed_seconds: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TracePoint>,
}

fn trace(phase: &str, first_step: usize, values: &[f64]) -> Vec<TracePoint> {
    values
        .iter()
        .enumerate()
        .map(|(i, &netsim)| TracePoint {
            phase: phase.to_owned(),
            step: first_step + i,
            netsim,
        })
        .collect()
}

impl RunReport {
    fn new(
        input: InputSummary,
        config: AlgorithmConfig,
        result: ClusteringResult,
        message_ops: u64,
        phases: PhaseReport,
        trace: Vec<TracePoint>,
    ) -> Self {
        Self {
            algorithm: config.name().to_owned(),
            input,
            config,
            num_clusters: result.num_clusters(),
            result,
            message_ops,
            phases,
            elapsed_seconds: 0.0,
            trace,
        }
    }

    pub fn from_ap(input: InputSummary, cfg: ApConfig, run: ApRun) -> Self {
        let phases = PhaseReport::Ap {
            iterations: run.result.iterations,
        };
        let trace = trace("ap", 1, &run.netsim_trace);
        Self::new(
            input,
            AlgorithmConfig::Ap(cfg),
            run.result,
            run.message_ops,
            phases,
            trace,
        )
    }

    pub fn from_pap(input: InputSummary, cfg: PapConfig, run: PapRun) -> Self {
        let phases = PhaseReport::Pap {
            block_sizes: run.plan.sizes(),
            block_iterations_max: run.block_iterations_max(),
            block_iterations_sum: run.block_iterations_sum(),
            block_iterations: run.block_iterations,
            outer_iterations: run.outer_iterations,
            k_check: run.k_check,
        };
        let trace = trace("outer", 1, &run.netsim_trace);
        Self::new(
            input,
            AlgorithmConfig::Pap(cfg),
            run.result,
            run.message_ops,
            phases,
            trace,
        )
    }

    /// LAP traces cover the refine sweeps and are kept only when `traced`.
    pub fn from_lap(input: InputSummary, cfg: LapConfig, run: LapRun, traced: bool) -> Self {
        let phases = PhaseReport::Lap {
            levels: run.levels,
            leftover_iterations: run.leftover_iterations,
            refine_sweeps: run.refine_sweeps,
        };
        let trace = if traced {
            trace("refine", 0, &run.refine_trace)
        } else {
            Vec::new()
        };
        Self::new(
            input,
            AlgorithmConfig::Lap(cfg),
            run.result,
            run.message_ops,
            phases,
            trace,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(["phase", "step", "netsim"])?;
        for p in &self.trace {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use densap_core::{affinity_propagation, install_preferences, PreferenceSpec, SimilarityMatrix};

    fn input() -> InputSummary {
        InputSummary {
            source: "test".into(),
            n: 3,
            preference: "median".into(),
        }
    }

    fn small() -> SimilarityMatrix {
        let s = SimilarityMatrix::from_rows(&[
            vec![0.0, -1.0 / 3.0, -10.0],
            vec![-1.0 / 3.0, 0.0, -9.7],
            vec![-10.0, -9.7, 0.0],
        ])
        .unwrap();
        install_preferences(s, &PreferenceSpec::Median).unwrap()
    }

    #[test]
    fn json_round_trips_exactly() {
        let cfg = ApConfig {
            trace: true,
            ..ApConfig::default()
        };
        let run = densap_core::run_affinity_propagation(&small(), &cfg, None).unwrap();
        let mut report = RunReport::from_ap(input(), cfg, run);
        report.elapsed_seconds = 0.1 + 0.2;
        assert!(!report.trace.is_empty());
        let back = RunReport::from_json(&report.to_json().unwrap()).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn untraced_reports_omit_the_trace() {
        let cfg = ApConfig::default();
        let result = affinity_propagation(&small(), &cfg, None).unwrap();
        let run = densap_core::run_affinity_propagation(&small(), &cfg, None).unwrap();
        assert_eq!(run.result, result);
        let json = RunReport::from_ap(input(), cfg, run).to_json().unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(value.get("trace").is_none());
        assert_eq!(value["algorithm"], "ap");
        assert_eq!(value["config"]["algorithm"], "ap");
        assert_eq!(value["phases"]["kind"], "ap");
    }

    #[test]
    fn trace_csv_layout() {
        let mut report = RunReport::from_ap(
            input(),
            ApConfig::default(),
            densap_core::run_affinity_propagation(&small(), &ApConfig::default(), None).unwrap(),
        );
        report.trace = trace("ap", 1, &[-1.5, -1.25]);
        let mut buf = Vec::new();
        report.write_trace_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "phase,step,netsim\nap,1,-1.5\nap,2,-1.25\n"
        );
    }
}
