//! Mediated coalition formation in metric spaces.
//!
//! Agents start in singleton coalitions. Each iteration a mediator picks two
//! coalitions and proposes a compromise point; every member votes it up or
//! down against a shared status quo, a constitution turns votes into moves,
//! and the process halts once one coalition holds the required share of the
//! population. The plane and a sentence-embedding space are both supported,
//! and [`harness`] runs seeded parameter sweeps over either.

pub mod agents;
pub mod cli;
pub mod engine;
pub mod error;
pub mod harness;
pub mod mediator;
pub mod metric;
pub mod stats;
pub mod text;

/// Random stream driving a single run.
pub type RunRng = rand_chacha::ChaCha8Rng;

pub use agents::{approval_probability, vote, Agent, AgentId, Vote};
pub use engine::{
    check_halt, run_process, step, Coalition, CoalitionStructure, DisciplinePolicy, HaltQuota, ProcessConfig,
    RunResult, RunStatus, Scenario,
};
pub use error::{Error, ProviderError, Result};
pub use mediator::{AveragingMediator, Mediator, MediatorConfig, MediatorOption, MediatorProposal, TextMediator};
pub use metric::{EmbedVec, EmbeddingSpace, Euclid2D, FiniteMetric, LinearSpace, MetricSpace, Point, Point2D, SpaceKind};
