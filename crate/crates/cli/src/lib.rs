//! File formats, benchmark driver and command-line front end for `treepoly`.

pub mod benchmark;
pub mod config;
pub mod error;
pub mod formats;

pub use benchmark::{export_ae_input, run_benchmark, summarize, BenchmarkOutcome};
pub use config::BenchmarkConfig;
pub use error::{Error, Result};
