//! Command-line front end for the slowent library: experiment configuration,
//! the theorem-verification suites, CSV persistence and plot-script emission.

pub mod checks;
pub mod config;
pub mod plot;
pub mod runner;

/// Version string stamped into run manifests.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
