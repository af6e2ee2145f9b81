//! Monte Carlo harness: configuration, sweeps over the experiment axes,
//! aggregation and plot-data files.

pub mod config;
pub mod plot;
pub mod summary;
pub mod sweep;
pub mod validate;

pub use config::ExperimentConfig;
pub use plot::{emit_plotdata, parse_plotdata, Curve, FigureId};
pub use summary::{read_aggregates, summarize, write_aggregates, Aggregate, Stats};
pub use sweep::{jobs, read_rows, run_sweep, run_sweep_streaming, write_rows, Job, ResultRow};
