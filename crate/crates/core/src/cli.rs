//! The `coalition` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use serde_json::{json, Value};

use crate::engine::{run_process, DisciplinePolicy, DEFAULT_ITERATION_CAP};
use crate::error::{Error, Result};
use crate::harness::batch::{euclid_runner, run_batch, text_runner, BatchOptions, RunDetail, RunOutput, TextProviders};
use crate::harness::config::{BatchConfig, RunConfig, DEFAULT_TOPIC};
use crate::harness::output::{analyze_csv, write_batch, write_stats, STATS_JSON};
use crate::harness::scenario::perturb_init;
use crate::harness::EuclidFixture;
use crate::mediator::{AveragingMediator, MediatorOption};
use crate::metric::{Euclid2D, SpaceKind, DEFAULT_EMBED_DIM};
use crate::text::transcript::{RecordingEmbedder, RecordingLlm, ReplayProvider, TranscriptEntry, TranscriptWriter};
use crate::text::{CachedEmbedder, Embedder, HashEmbedder, HttpConfig, HttpEmbedder, HttpLlm, LlmProvider, MockLlm};
use crate::RunRng;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PROVIDER: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "coalition", version, about = "Mediated coalition formation in metric spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one Euclidean configuration and print each run's outcome
    Simulate(SimulateArgs),
    /// Execute every configuration of a batch file
    Sweep(SweepArgs),
    /// Run a text-space batch against an LLM and embedding provider
    TextRun(TextRunArgs),
    /// One-way ANOVA and pairwise tests over a runs.csv column
    Analyze(AnalyzeArgs),
    /// Re-execute a recorded text batch from its transcript
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProcessFlags {
    /// Approval spread of every agent; 0 is the deterministic model
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Pair selection bias in [-1, 1]; positive favours coalitions far from the centroid
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    /// none, unanimity or quota:<fraction>
    #[arg(long, default_value = "none")]
    pub discipline: DisciplinePolicy,
    /// Start coalitions near, not at, the ideal points
    #[arg(long)]
    pub noise_init: bool,
    /// Share of agents the winning coalition must hold
    #[arg(long, default_value_t = 0.5)]
    pub halt_quota: f64,
    /// Iteration cap
    #[arg(long, default_value_t = DEFAULT_ITERATION_CAP)]
    pub cap: usize,
    /// Master seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Repetitions
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OutputFlags {
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads [default: available cores]
    #[arg(long)]
    pub workers: Option<usize>,
    /// Keep per-iteration traces (runs.jsonl and iterations.csv)
    #[arg(long)]
    pub traces: bool,
}

impl OutputFlags {
    fn options(&self) -> BatchOptions {
        let mut o = BatchOptions::default();
        if let Some(w) = self.workers {
            o.workers = w;
        }
        o.traces = self.traces;
        o
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Metric space; only euclid2d here
    #[arg(long, default_value = "euclid2d")]
    pub space: SpaceKind,
    /// Number of agents [default: 10, or the fixture's count]
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub process: ProcessFlags,
    /// Gaussian mixture peaks for ideal points, 0 for uniform
    #[arg(long, default_value_t = 0)]
    pub gmm_peaks: u8,
    /// Scenario fixture (status quo and ideal points) instead of sampling
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Batch configuration file
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProviderKind {
    Mock,
    Http,
    Replay,
}

#[derive(Debug, Clone, Args)]
pub struct TextRunArgs {
    /// Batch configuration file; replaces the run flags below
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// embedding:<dimension>
    #[arg(long, default_value = "embedding:512")]
    pub space: SpaceKind,
    /// Number of agents
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[command(flatten)]
    pub process: ProcessFlags,
    /// Subject of the generated sentences
    #[arg(long, default_value = DEFAULT_TOPIC)]
    pub topic: String,
    /// Compromise strategy, 1 to 5
    #[arg(long, default_value = "1")]
    pub mediator_option: MediatorOption,
    /// Where sentences and embeddings come from
    #[arg(long, value_enum, default_value_t = ProviderKind::Mock)]
    pub provider: ProviderKind,
    /// Transcript to record to (mock, http) or read from (replay)
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// runs.csv to read
    #[arg(long)]
    pub input: PathBuf,
    /// Column whose values define the groups
    #[arg(long, default_value = "mediator_option")]
    pub group_by: String,
    /// Numeric column to compare
    #[arg(long, default_value = "iterations")]
    pub metric: String,
    /// Where to write stats.json [default: next to the input]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Transcript recorded by text-run
    #[arg(long)]
    pub transcript: PathBuf,
    #[command(flatten)]
    pub output: OutputFlags,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_provider() {
                EXIT_PROVIDER
            } else {
                EXIT_CONFIG
            }
        }
    }
}

pub fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Simulate(a) => simulate(&a),
        Command::Sweep(a) => sweep(&a),
        Command::TextRun(a) => text_run(&a),
        Command::Analyze(a) => analyze(&a),
        Command::Replay(a) => replay(&a),
    }
}

fn base_config(mut c: RunConfig, p: &ProcessFlags) -> RunConfig {
    c.sigma = p.sigma;
    c.alpha = p.alpha;
    c.discipline = p.discipline;
    c.noise_init = p.noise_init;
    c.halt_quota = p.halt_quota;
    c.iteration_cap = p.cap;
    c.seed = p.seed;
    c.repetitions = p.reps;
    c
}

fn out_dir(o: &OutputFlags) -> PathBuf {
    o.out.clone().unwrap_or_else(|| PathBuf::from("results"))
}

fn outcome_line(o: &RunOutput) -> Value {
    let r = &o.record;
    let winner = o
        .result
        .as_ref()
        .and_then(|v| v.pointer("/winning_coalition/members"))
        .cloned()
        .unwrap_or(Value::Null);
    json!({
        "run_id": r.run_id,
        "seed": r.seed,
        "status": r.status,
        "converged": r.converged,
        "iterations": r.iterations,
        "quality": r.quality,
        "coalition_count": r.coalition_count,
        "largest_size": r.largest_size,
        "winner": winner,
        "error": r.error,
    })
}

/// Writes the batch files and maps failed runs onto an exit code.
fn finish(outputs: &[RunOutput], dir: Option<&Path>) -> Result<i32> {
    if let Some(dir) = dir {
        let written = write_batch(dir, outputs)?;
        for f in &written.files {
            eprintln!("wrote {}", f.display());
        }
    }
    let failed: Vec<&RunOutput> = outputs.iter().filter(|o| o.record.failed()).collect();
    let converged = outputs.iter().filter(|o| o.record.converged).count();
    eprintln!(
        "{} runs, {converged} converged, {} failed",
        outputs.len(),
        failed.len()
    );
    if failed.iter().any(|o| o.provider_failure) {
        return Ok(EXIT_PROVIDER);
    }
    if !failed.is_empty() {
        return Ok(EXIT_CONFIG);
    }
    Ok(EXIT_OK)
}

fn simulate(a: &SimulateArgs) -> Result<i32> {
    if a.space != SpaceKind::Euclid2D {
        return Err(Error::Config("simulate runs the euclid2d space; use text-run for text".into()));
    }
    let fixture = a.config.as_deref().map(EuclidFixture::load).transpose()?;
    let n = match (&fixture, a.n) {
        (Some(f), Some(n)) if n != f.n() => {
            return Err(Error::Config(format!("--n {n} but the fixture has {} agents", f.n())));
        }
        (Some(f), _) => f.n(),
        (None, n) => n.unwrap_or(10),
    };
    let mut config = base_config(RunConfig::euclid(n), &a.process);
    config.gmm_peaks = Some(a.gmm_peaks);
    let options = a.output.options();
    let outputs = match &fixture {
        Some(f) => run_batch(&[config], options, |c: &RunConfig, seed, traces| {
            let mut scenario = f.scenario(c.sigma, seed)?;
            let mut rng = RunRng::seed_from_u64(seed);
            if c.noise_init {
                scenario.initial_points = scenario.initial_points.iter().map(|p| perturb_init(p, &mut rng)).collect();
            }
            let mut mediator = AveragingMediator::new(c.alpha)?;
            RunDetail::from_result(&run_process(&Euclid2D, &scenario, &c.process_config(traces)?, &mut mediator, &mut rng)?)
        })?,
        None => run_batch(&[config], options, euclid_runner)?,
    };
    for o in &outputs {
        println!("{}", outcome_line(o));
    }
    finish(&outputs, a.output.out.as_deref())
}

fn sweep(a: &SweepArgs) -> Result<i32> {
    let batch = BatchConfig::load(&a.config)?;
    let configs = batch.expand()?;
    if configs.iter().any(RunConfig::is_text) {
        return Err(Error::Config("text batches run with `text-run --config`".into()));
    }
    let outputs = run_batch(&configs, a.output.options(), euclid_runner)?;
    finish(&outputs, Some(&out_dir(&a.output)))
}

fn mock_providers(dimension: usize) -> TextProviders {
    TextProviders {
        llm: Arc::new(MockLlm::new(0)),
        embedder: Arc::new(HashEmbedder::new(dimension, 0)),
    }
}

fn http_providers() -> Result<TextProviders> {
    let config = HttpConfig::from_env().map_err(|e| Error::provider("http setup", e))?;
    let llm = HttpLlm::new(config.clone()).map_err(|e| Error::provider("http setup", e))?;
    let embedder = HttpEmbedder::new(config).map_err(|e| Error::provider("http setup", e))?;
    Ok(TextProviders {
        llm: Arc::new(llm),
        embedder: Arc::new(CachedEmbedder::new(embedder)),
    })
}

fn transcript_header(configs: &[RunConfig], traces: bool, dimension: usize, provider: &str) -> Result<TranscriptEntry> {
    Ok(TranscriptEntry::Header {
        config: json!({
            "configs": serde_json::to_value(configs)?,
            "traces": traces,
            "embed_dimension": dimension,
            "provider": provider,
        }),
    })
}

fn text_configs(a: &TextRunArgs) -> Result<Vec<RunConfig>> {
    let configs = match &a.config {
        Some(path) => BatchConfig::load(path)?.expand()?,
        None => {
            let SpaceKind::Embedding { dimension } = a.space else {
                return Err(Error::Config("text-run needs an embedding space".into()));
            };
            let c = RunConfig::text(a.n, dimension, a.topic.clone(), a.mediator_option);
            vec![base_config(c, &a.process)]
        }
    };
    if let Some(c) = configs.iter().find(|c| !c.is_text()) {
        return Err(Error::Config(format!("text-run got a {} configuration", c.space)));
    }
    Ok(configs)
}

fn dimension_of(configs: &[RunConfig]) -> usize {
    configs
        .iter()
        .find_map(|c| match c.space {
            SpaceKind::Embedding { dimension } => Some(dimension),
            SpaceKind::Euclid2D => None,
        })
        .unwrap_or(DEFAULT_EMBED_DIM)
}

fn text_run(a: &TextRunArgs) -> Result<i32> {
    let configs = text_configs(a)?;
    let options = a.output.options();
    let dimension = dimension_of(&configs);
    let providers = match a.provider {
        ProviderKind::Mock => mock_providers(dimension),
        ProviderKind::Http => http_providers()?,
        ProviderKind::Replay => {
            let path = a
                .transcript
                .as_deref()
                .ok_or_else(|| Error::Config("--provider replay needs --transcript".into()))?;
            let replay = Arc::new(ReplayProvider::open(path)?);
            let outputs = run_batch(&configs, options, text_runner(&TextProviders { llm: replay.clone(), embedder: replay }))?;
            return finish(&outputs, Some(&out_dir(&a.output)));
        }
    };
    let providers = match &a.transcript {
        Some(path) => {
            let writer = Arc::new(TranscriptWriter::create(path)?);
            let name = providers.llm.name().to_string();
            writer.write(&transcript_header(&configs, options.traces, providers.embedder.dimension(), &name)?)?;
            TextProviders {
                llm: Arc::new(RecordingLlm::new(providers.llm, writer.clone())) as Arc<dyn LlmProvider>,
                embedder: Arc::new(RecordingEmbedder::new(providers.embedder, writer)) as Arc<dyn Embedder>,
            }
        }
        None => providers,
    };
    let outputs = run_batch(&configs, options, text_runner(&providers))?;
    finish(&outputs, Some(&out_dir(&a.output)))
}

fn replay(a: &ReplayArgs) -> Result<i32> {
    let provider = Arc::new(ReplayProvider::open(&a.transcript)?);
    let header = provider
        .header()
        .ok_or_else(|| Error::Config(format!("{} has no header line", a.transcript.display())))?;
    let configs: Vec<RunConfig> = serde_json::from_value(header.get("configs").cloned().unwrap_or(Value::Null))
        .map_err(|e| Error::Config(format!("transcript header: {e}")))?;
    let mut options = a.output.options();
    options.traces = options.traces || header.get("traces").and_then(Value::as_bool).unwrap_or(false);
    let providers = TextProviders {
        llm: provider.clone(),
        embedder: provider,
    };
    let outputs = run_batch(&configs, options, text_runner(&providers))?;
    finish(&outputs, Some(&out_dir(&a.output)))
}

fn analyze(a: &AnalyzeArgs) -> Result<i32> {
    let report = analyze_csv(&a.input, &a.group_by, &a.metric, 0.05)?;
    let out = match &a.out {
        Some(p) => p.clone(),
        None => a.input.parent().unwrap_or(Path::new(".")).join(STATS_JSON),
    };
    write_stats(&out, &report)?;
    for g in &report.groups {
        println!("{}={} count={} mean={:.4} std={:.4}", report.group_by, g.key, g.count, g.mean, g.std);
    }
    match &report.anova {
        Some(an) => println!("anova F={:.4} p={:.4e}", an.f, an.p),
        None => println!("anova not computed"),
    }
    for p in report.pairwise.iter().filter(|p| p.row.significant) {
        println!("significant: {} vs {} (corrected p {:.4e})", p.a, p.b, p.row.corrected_p);
    }
    eprintln!("wrote {}", out.display());
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from(["coalition", "simulate", "--alpha", "-1", "--discipline", "quota:0.5", "--noise-init"]).unwrap();
        let Command::Simulate(a) = cli.command else { panic!() };
        assert_eq!(a.process.alpha, -1.0);
        assert_eq!(a.process.discipline, DisciplinePolicy::Quota(0.5));
        assert!(a.process.noise_init);
        assert_eq!(a.process.cap, 10_000);
        assert!(Cli::try_parse_from(["coalition", "simulate", "--bogus"]).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["coalition", "sweep", "--config", "/nonexistent/batch.json"]), EXIT_CONFIG);
        assert_eq!(run(["coalition", "frobnicate"]), EXIT_CONFIG);
        assert_eq!(run(["coalition", "--help"]), EXIT_OK);
    }
}
