//! File formats, run reports, benchmark suites and the command line for
//! [`densap_core`].

pub mod bench;
pub mod cli;
mod error;
pub mod io;
pub mod report;

pub use crate::error::{Error, Result};
