//! Scenario sampling, seeded batch execution and result files.

pub mod batch;
pub mod config;
pub mod fixture;
pub mod output;
pub mod projection;
pub mod scenario;

pub use batch::{
    derive_seed, euclid_runner, run_batch, run_euclid, run_text, splitmix64, text_runner, BatchOptions, RunOutput,
    RunRecord, TextProviders,
};
pub use config::{Axis, BatchConfig, RunConfig};
pub use fixture::EuclidFixture;
pub use output::{analyze_csv, summarize, write_batch, StatsReport, SummaryRow};
pub use scenario::{perturb_init, sample_ideal_points, sample_status_quo, GmmSpec};
