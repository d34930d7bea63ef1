//! Exemplar clustering over dense similarity matrices.
//!
//! The crate implements affinity propagation (AP) message passing together
//! with two variants aimed at large inputs:
//!
//! - [`pap`]: partition AP. Diagonal blocks of the similarity matrix are
//!   clustered independently and their availabilities seed a full run.
//! - [`lap`]: landmark AP. A random landmark subset is clustered, the rest of
//!   the points are embedded inside per-class radii, leftovers are clustered
//!   separately (recursively when large) and the merged exemplar set is
//!   polished by medoid refinement.
//!
//! Supporting modules build similarity matrices ([`similarity`]), generate
//! synthetic data ([`datasets`]) and score clusterings ([`metrics`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, reports and the
//! command line live in the `densap` companion crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod datasets;
pub mod engine;
mod error;
pub mod lap;
mod matrix;
pub mod metrics;
pub mod pap;
pub mod similarity;

pub use crate::engine::{
    affinity_propagation, energy, extract_result, run_affinity_propagation, update_availabilities,
    update_responsibilities, ApConfig, ApRun, ClusteringResult, Jitter, MessageState,
};
pub use crate::error::{Error, Result};
pub use crate::lap::{lap_cluster, refine, LapConfig, LapRun};
pub use crate::matrix::SquareMatrix;
pub use crate::pap::{pap_cluster, PapConfig, PapRun};
pub use crate::similarity::{install_preferences, neg_sq_euclidean, PointSet, PreferenceSpec, SimilarityMatrix};
