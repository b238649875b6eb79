//! Command-line front end: model loading, analysis runs, statistics, plot
//! output and a comparison harness.

pub mod compare;
pub mod plot;
pub mod run;
pub mod stats;

pub use compare::{compare, Comparison, ContainmentCheck};
pub use plot::{PlotFormat, PolygonRecord};
pub use run::{run, PlotRequest, RunConfig, RunOutcome, EXIT_INPUT_ERROR};
pub use stats::StatsRecord;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Config(String),
    #[error("analysis failed: {0}")]
    Analysis(String),
    #[error("plot: {0}")]
    Plot(String),
    #[error("stats: {0}")]
    Stats(String),
}
