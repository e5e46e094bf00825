//! Seeded execution of run grids.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::RunConfig;
use super::projection::project_2d;
use super::scenario::{perturb_init, sample_ideal_points, sample_status_quo, GmmSpec};
use crate::agents::Agent;
use crate::engine::{run_process, RunResult, RunStatus, Scenario};
use crate::error::{Error, Result};
use crate::mediator::{AveragingMediator, TextMediator};
use crate::metric::{EmbedVec, EmbeddingSpace, Euclid2D, Point2D};
use crate::text::{self, Embedder, LlmProvider};
use crate::RunRng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One step of the SplitMix64 generator, as a mixing function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of repetition `rep` of configuration `config_index`:
/// `splitmix64(splitmix64(splitmix64(master) ^ config_index) ^ rep)`.
pub fn derive_seed(master: u64, config_index: u64, rep: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ config_index) ^ rep)
}

/// One row of `runs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub config_index: usize,
    pub rep: usize,
    pub space: String,
    pub n: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub discipline: String,
    pub noise_init: bool,
    pub halt_quota: f64,
    pub iteration_cap: usize,
    pub gmm_peaks: Option<u8>,
    pub topic: Option<String>,
    pub mediator_option: Option<u8>,
    pub master_seed: u64,
    pub seed: u64,
    /// `converged`, `cap_reached`, `stalled` or `failed`.
    pub status: String,
    pub converged: bool,
    pub iterations: usize,
    /// `iterations` for converged runs, the cap otherwise.
    pub speed_iterations: usize,
    pub quality: Option<f64>,
    pub coalition_count: usize,
    pub largest_size: usize,
    pub error: Option<String>,
}

impl RunRecord {
    fn new(run_id: usize, config_index: usize, rep: usize, config: &RunConfig, seed: u64) -> Self {
        RunRecord {
            run_id,
            config_index,
            rep,
            space: config.space.to_string(),
            n: config.n,
            sigma: config.sigma,
            alpha: config.alpha,
            discipline: config.discipline.to_string(),
            noise_init: config.noise_init,
            halt_quota: config.halt_quota,
            iteration_cap: config.iteration_cap,
            gmm_peaks: config.gmm_peaks,
            topic: config.topic.clone(),
            mediator_option: config.mediator_option.map(|o| o.number()),
            master_seed: config.seed,
            seed,
            status: "failed".into(),
            converged: false,
            iterations: 0,
            speed_iterations: config.iteration_cap,
            quality: None,
            coalition_count: 0,
            largest_size: 0,
            error: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    fn fill(&mut self, result: &RunOutcome) {
        self.status = result.status.to_string();
        self.converged = result.converged;
        self.iterations = result.iterations;
        self.speed_iterations = if result.converged { result.iterations } else { self.iteration_cap };
        self.quality = result.quality;
        self.coalition_count = result.coalition_count;
        self.largest_size = result.largest_size;
    }
}

/// One row of `iterations.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub run_id: usize,
    pub iteration: usize,
    pub coalition_count: usize,
    pub largest_size: usize,
    pub accepted: usize,
}

/// One row of `projection.csv`: a text-run point mapped to the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub run_id: usize,
    /// `status_quo`, `ideal` or `winner`.
    pub role: String,
    pub agent: Option<u32>,
    pub x: f64,
    pub y: f64,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    /// The full run result as JSON; traces only when requested.
    pub result: Option<Value>,
    pub iterations: Vec<IterationRow>,
    pub projection: Vec<ProjectionRow>,
    pub provider_failure: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchOptions {
    pub workers: usize,
    pub traces: bool,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            traces: false,
        }
    }
}

/// Headline numbers of a finished run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub converged: bool,
    pub iterations: usize,
    pub quality: Option<f64>,
    pub coalition_count: usize,
    pub largest_size: usize,
}

impl<P> From<&RunResult<P>> for RunOutcome {
    fn from(r: &RunResult<P>) -> Self {
        RunOutcome {
            status: r.status,
            converged: r.converged,
            iterations: r.iterations,
            quality: r.quality,
            coalition_count: r.coalition_count,
            largest_size: r.largest_size,
        }
    }
}

/// Everything a runner returns for one repetition.
pub struct RunDetail {
    pub outcome: RunOutcome,
    pub result: Value,
    pub iterations: Vec<IterationRow>,
    pub projection: Vec<ProjectionRow>,
}

impl RunDetail {
    pub fn from_result<P: Serialize>(result: &RunResult<P>) -> Result<Self> {
        let iterations = result
            .trace
            .iter()
            .map(|r| IterationRow {
                run_id: 0,
                iteration: r.iteration,
                coalition_count: r.sizes.len(),
                largest_size: r.sizes.iter().copied().max().unwrap_or(0),
                accepted: r.accepted,
            })
            .collect();
        Ok(RunDetail {
            outcome: result.into(),
            result: serde_json::to_value(result)?,
            iterations,
            projection: Vec::new(),
        })
    }
}

/// Runs every repetition of every configuration on `workers` threads.
///
/// Outputs come back in (configuration, repetition) order whatever the
/// completion order. A failing run is recorded and the batch continues.
pub fn run_batch<F>(configs: &[RunConfig], options: BatchOptions, runner: F) -> Result<Vec<RunOutput>>
where
    F: Fn(&RunConfig, u64, bool) -> Result<RunDetail> + Sync,
{
    for c in configs {
        c.validate()?;
    }
    let jobs: Vec<(usize, usize)> = configs
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| (0..c.repetitions).map(move |rep| (ci, rep)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let outputs = pool.install(|| {
        jobs.par_iter()
            .enumerate()
            .map(|(run_id, &(ci, rep))| {
                let config = &configs[ci];
                let seed = derive_seed(config.seed, ci as u64, rep as u64);
                let mut record = RunRecord::new(run_id, ci, rep, config, seed);
                match runner(config, seed, options.traces) {
                    Ok(detail) => {
                        record.fill(&detail.outcome);
                        let mut iterations = detail.iterations;
                        let mut projection = detail.projection;
                        iterations.iter_mut().for_each(|r| r.run_id = run_id);
                        projection.iter_mut().for_each(|r| r.run_id = run_id);
                        RunOutput {
                            record,
                            result: Some(detail.result),
                            iterations,
                            projection,
                            provider_failure: false,
                        }
                    }
                    Err(e) => {
                        log::warn!("run {run_id} (config {ci}, rep {rep}) failed: {e}");
                        record.error = Some(e.to_string());
                        RunOutput {
                            record,
                            result: None,
                            iterations: Vec::new(),
                            projection: Vec::new(),
                            provider_failure: e.is_provider(),
                        }
                    }
                }
            })
            .collect()
    });
    Ok(outputs)
}

/// Status quo, mixture, ideal points and optional noisy starts, drawn in that
/// order from `rng`.
pub fn euclid_scenario(config: &RunConfig, seed: u64, rng: &mut RunRng) -> Result<Scenario<Point2D>> {
    let status_quo = sample_status_quo(rng);
    let spec = GmmSpec::sample(config.gmm_peaks.unwrap_or(0), rng)?;
    let ideals = sample_ideal_points(config.n, &spec, rng);
    let initial_points = if config.noise_init {
        ideals.iter().map(|p| perturb_init(p, rng)).collect()
    } else {
        ideals.clone()
    };
    let agents = ideals
        .into_iter()
        .enumerate()
        .map(|(k, p)| Agent::new(k as u32, p, config.sigma))
        .collect::<Result<Vec<_>>>()?;
    Ok(Scenario {
        seed,
        status_quo,
        agents,
        initial_points,
    })
}

pub fn run_euclid(config: &RunConfig, seed: u64, traces: bool) -> Result<RunResult<Point2D>> {
    let mut rng = RunRng::seed_from_u64(seed);
    let scenario = euclid_scenario(config, seed, &mut rng)?;
    let mut mediator = AveragingMediator::new(config.alpha)?;
    run_process(&Euclid2D, &scenario, &config.process_config(traces)?, &mut mediator, &mut rng)
}

pub fn euclid_runner(config: &RunConfig, seed: u64, traces: bool) -> Result<RunDetail> {
    RunDetail::from_result(&run_euclid(config, seed, traces)?)
}

/// Chat model and embedder shared by every run of a text batch.
#[derive(Clone)]
pub struct TextProviders {
    pub llm: Arc<dyn LlmProvider>,
    pub embedder: Arc<dyn Embedder>,
}

pub struct TextRun {
    pub scenario: Scenario<EmbedVec>,
    pub result: RunResult<EmbedVec>,
}

/// Status quo sentence, ideal sentences and, with noisy starts, one
/// resembling sentence per agent, all seeded from `rng` in that order.
pub fn text_scenario(
    config: &RunConfig,
    seed: u64,
    providers: &TextProviders,
    rng: &mut RunRng,
) -> Result<Scenario<EmbedVec>> {
    let topic = config
        .topic
        .as_deref()
        .ok_or_else(|| Error::Config("text runs need a topic".into()))?;
    let opts = config.request_options();
    let llm = providers.llm.as_ref();
    let embedder = providers.embedder.as_ref();
    let status_quo_text = text::generate_ideal_sentences(topic, 1, llm, &opts, rng)?.remove(0);
    let ideal_texts = text::generate_ideal_sentences(topic, config.n, llm, &opts, rng)?;
    let initial_texts = if config.noise_init {
        ideal_texts
            .iter()
            .map(|s| text::generate_resembling(s, llm, &opts, rng.random()))
            .collect::<Result<Vec<_>>>()?
    } else {
        ideal_texts.clone()
    };
    let status_quo = text::embed(&status_quo_text, embedder)?;
    let agents = ideal_texts
        .iter()
        .enumerate()
        .map(|(k, s)| Agent::new(k as u32, text::embed(s, embedder)?, config.sigma))
        .collect::<Result<Vec<_>>>()?;
    let initial_points = initial_texts
        .iter()
        .map(|s| text::embed(s, embedder))
        .collect::<Result<Vec<_>>>()?;
    Ok(Scenario {
        seed,
        status_quo,
        agents,
        initial_points,
    })
}

pub fn run_text(config: &RunConfig, seed: u64, providers: &TextProviders, traces: bool) -> Result<TextRun> {
    let dimension = providers.embedder.dimension();
    if let crate::metric::SpaceKind::Embedding { dimension: want } = config.space {
        if want != dimension {
            return Err(Error::DimensionMismatch {
                expected: want,
                found: dimension,
            });
        }
    }
    let space = EmbeddingSpace::new(dimension)?;
    let mut rng = RunRng::seed_from_u64(seed);
    let scenario = text_scenario(config, seed, providers, &mut rng)?;
    let topic = config.topic.clone().unwrap_or_default();
    let mut mediator = TextMediator::new(
        config.mediator_config(),
        topic,
        providers.llm.clone(),
        providers.embedder.clone(),
    )?
    .with_request_options(config.request_options());
    let result = run_process(&space, &scenario, &config.process_config(traces)?, &mut mediator, &mut rng)?;
    Ok(TextRun { scenario, result })
}

/// Ideal points, status quo and winning proposal projected onto their two
/// principal axes.
pub fn projection_rows(run: &TextRun) -> Vec<ProjectionRow> {
    let mut rows: Vec<(String, Option<u32>, &EmbedVec)> = vec![("status_quo".into(), None, &run.scenario.status_quo)];
    rows.extend(run.scenario.agents.iter().map(|a| ("ideal".into(), Some(a.id.0), &a.ideal)));
    if let Some(w) = &run.result.winning_coalition {
        rows.push(("winner".into(), None, &w.point));
    }
    let coords = project_2d(&rows.iter().map(|(_, _, v)| v.components()).collect::<Vec<_>>());
    rows.into_iter()
        .zip(coords)
        .map(|((role, agent, v), (x, y))| ProjectionRow {
            run_id: 0,
            role,
            agent,
            x,
            y,
            text: v.source_text().unwrap_or("").to_string(),
        })
        .collect()
}

pub fn text_runner(providers: &TextProviders) -> impl Fn(&RunConfig, u64, bool) -> Result<RunDetail> + Sync + '_ {
    move |config, seed, traces| {
        let run = run_text(config, seed, providers, traces)?;
        let mut detail = RunDetail::from_result(&run.result)?;
        detail.projection = projection_rows(&run);
        Ok(detail)
    }
}
