//! Configuration files, output formats, runs and sweeps on top of `mcflow-core`.

pub mod config;
pub mod io;
pub mod run;
pub mod sweep;

pub use mcflow_core as core;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "MCFLOW_OUT";
