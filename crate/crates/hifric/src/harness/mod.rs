//! Configuration, experiment orchestration and rate fitting — the surface the
//! CLI and the examples drive.

pub mod config;
pub mod fit;
pub mod run;

pub use config::RunConfig;
pub use fit::{fit_rate, observed_order, RateFit};
pub use run::{
    run_paired, run_single, run_sweep, Model, PairedOutcome, PairedRow, RunSummary, SweepEntry,
    SweepOutcome, TableWriter,
};
