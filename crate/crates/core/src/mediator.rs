//! Pair selection and compromise construction.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Coalition, CoalitionStructure};
use crate::error::{Error, Result};
use crate::metric::{normalize_distances, EmbedVec, EmbeddingSpace, LinearSpace, MetricSpace, Point2D};
use crate::text::{self, Embedder, LlmProvider, RequestOptions, TemplateId, DEFAULT_CANDIDATES};
use crate::RunRng;

/// Two coalition indices and the point they are invited to merge around.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MediatorProposal<P> {
    pub i: usize,
    pub j: usize,
    pub point: P,
}

pub trait Mediator<S: MetricSpace> {
    fn propose(
        &mut self,
        space: &S,
        structure: &CoalitionStructure<S::Point>,
        rng: &mut RunRng,
    ) -> Result<MediatorProposal<S::Point>>;
}

impl<S: MetricSpace, M: Mediator<S> + ?Sized> Mediator<S> for Box<M> {
    fn propose(
        &mut self,
        space: &S,
        structure: &CoalitionStructure<S::Point>,
        rng: &mut RunRng,
    ) -> Result<MediatorProposal<S::Point>> {
        (**self).propose(space, structure, rng)
    }
}

/// How text compromises are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum MediatorOption {
    /// Best of several aggregations under the plain prompt.
    BestOfPlain = 1,
    /// Best of several aggregations under the prompt that keeps opinions.
    BestOfFaithful = 2,
    /// Best of several aggregations under the mediator-persona prompt.
    BestOfPersona = 3,
    Single = 4,
    Random = 5,
}

impl MediatorOption {
    pub const ALL: [MediatorOption; 5] = [
        MediatorOption::BestOfPlain,
        MediatorOption::BestOfFaithful,
        MediatorOption::BestOfPersona,
        MediatorOption::Single,
        MediatorOption::Random,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn template(self) -> TemplateId {
        match self {
            MediatorOption::BestOfPlain => TemplateId::Mediator1,
            MediatorOption::BestOfFaithful => TemplateId::Mediator2,
            MediatorOption::BestOfPersona => TemplateId::Mediator3,
            MediatorOption::Single => TemplateId::Mediator4,
            MediatorOption::Random => TemplateId::Mediator5,
        }
    }
}

impl TryFrom<u8> for MediatorOption {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        MediatorOption::ALL
            .get((v as usize).wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::Config(format!("mediator option must be 1..=5, got {v}")))
    }
}

impl From<MediatorOption> for u8 {
    fn from(o: MediatorOption) -> u8 {
        o.number()
    }
}

impl fmt::Display for MediatorOption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for MediatorOption {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: u8 = s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("mediator option must be 1..=5, got `{s}`")))?;
        v.try_into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediatorConfig {
    pub alpha: f64,
    pub text_option: Option<MediatorOption>,
    pub candidate_count: usize,
}

impl Default for MediatorConfig {
    fn default() -> Self {
        MediatorConfig {
            alpha: 0.0,
            text_option: None,
            candidate_count: DEFAULT_CANDIDATES,
        }
    }
}

impl MediatorConfig {
    pub fn validate(&self) -> Result<()> {
        validate_alpha(self.alpha)?;
        if self.candidate_count == 0 {
            return Err(Error::Config("candidate count must be at least 1".into()));
        }
        Ok(())
    }
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!("alpha must lie in [-1, 1], got {alpha}")));
    }
    Ok(())
}

fn weighted_points<P>(structure: &CoalitionStructure<P>) -> Vec<(&P, f64)> {
    structure
        .coalitions()
        .iter()
        .map(|c| (&c.point, c.size() as f64))
        .collect()
}

/// Probability of each coalition being drawn first.
///
/// Scores are `exp(alpha * d')`, where `d'` is the distance from a coalition
/// point to the size-weighted centroid divided by the largest such distance.
pub fn selection_probabilities<S: MetricSpace>(
    space: &S,
    structure: &CoalitionStructure<S::Point>,
    alpha: f64,
) -> Result<Vec<f64>> {
    validate_alpha(alpha)?;
    let z = structure.len();
    if z == 0 {
        return Err(Error::InsufficientCoalitions(0));
    }
    if alpha == 0.0 {
        return Ok(vec![1.0 / z as f64; z]);
    }
    let centroid = space.centroid(&weighted_points(structure))?;
    let dists = structure
        .coalitions()
        .iter()
        .map(|c| space.dist(&c.point, &centroid))
        .collect::<Result<Vec<_>>>()?;
    Ok(scores_to_probabilities(&normalize_distances(&dists)?, alpha))
}

/// `exp(alpha * d) / sum`, for already normalized distances.
pub fn scores_to_probabilities(normalized: &[f64], alpha: f64) -> Vec<f64> {
    let scores: Vec<f64> = normalized.iter().map(|d| (alpha * d).exp()).collect();
    let total: f64 = scores.iter().sum();
    scores.into_iter().map(|s| s / total).collect()
}

/// Index drawn from `probs` with a single uniform variate.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// Closest other coalition to `i`, lowest index on ties.
pub fn nearest_coalition<S: MetricSpace>(
    space: &S,
    structure: &CoalitionStructure<S::Point>,
    i: usize,
) -> Result<usize> {
    let pi = &structure
        .get(i)
        .ok_or(Error::InvalidProposal {
            i,
            j: i,
            len: structure.len(),
        })?
        .point;
    let mut best: Option<(usize, f64)> = None;
    for (k, c) in structure.coalitions().iter().enumerate() {
        if k == i {
            continue;
        }
        let d = space.dist(&c.point, pi)?;
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((k, d));
        }
    }
    best.map(|(k, _)| k).ok_or(Error::InsufficientCoalitions(structure.len()))
}

/// Draws `i` by selection probability, then pairs it with its nearest
/// neighbour.
pub fn select_pair<S: MetricSpace>(
    space: &S,
    structure: &CoalitionStructure<S::Point>,
    alpha: f64,
    rng: &mut RunRng,
) -> Result<(usize, usize)> {
    if structure.len() < 2 {
        return Err(Error::InsufficientCoalitions(structure.len()));
    }
    let probs = selection_probabilities(space, structure, alpha)?;
    let i = sample_index(&probs, rng);
    Ok((i, nearest_coalition(space, structure, i)?))
}

/// Size-weighted average of two coalition points.
pub fn compromise<S: LinearSpace>(space: &S, ci: &Coalition<S::Point>, cj: &Coalition<S::Point>) -> Result<S::Point> {
    space.weighted_mean(&[(&ci.point, ci.size() as f64), (&cj.point, cj.size() as f64)])
}

pub fn compromise_euclid(ci: &Coalition<Point2D>, cj: &Coalition<Point2D>) -> Point2D {
    let (wi, wj) = (ci.size() as f64, cj.size() as f64);
    let w = wi + wj;
    Point2D {
        x: (wi * ci.point.x + wj * cj.point.x) / w,
        y: (wi * ci.point.y + wj * cj.point.y) / w,
    }
}

/// Proposes the weighted average of the selected pair, in any linear space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragingMediator {
    alpha: f64,
}

impl AveragingMediator {
    pub fn new(alpha: f64) -> Result<Self> {
        validate_alpha(alpha)?;
        Ok(AveragingMediator { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl<S: LinearSpace> Mediator<S> for AveragingMediator {
    fn propose(
        &mut self,
        space: &S,
        structure: &CoalitionStructure<S::Point>,
        rng: &mut RunRng,
    ) -> Result<MediatorProposal<S::Point>> {
        let (i, j) = select_pair(space, structure, self.alpha, rng)?;
        let point = compromise(space, &structure.coalitions()[i], &structure.coalitions()[j])?;
        Ok(MediatorProposal { i, j, point })
    }
}

/// Replays a fixed list of proposals, then fails.
#[derive(Debug, Clone)]
pub struct ScriptedMediator<P> {
    script: VecDeque<MediatorProposal<P>>,
}

impl<P> ScriptedMediator<P> {
    pub fn new(script: impl IntoIterator<Item = MediatorProposal<P>>) -> Self {
        ScriptedMediator {
            script: script.into_iter().collect(),
        }
    }
}

impl<S: MetricSpace> Mediator<S> for ScriptedMediator<S::Point> {
    fn propose(
        &mut self,
        _space: &S,
        structure: &CoalitionStructure<S::Point>,
        _rng: &mut RunRng,
    ) -> Result<MediatorProposal<S::Point>> {
        if structure.len() < 2 {
            return Err(Error::InsufficientCoalitions(structure.len()));
        }
        self.script
            .pop_front()
            .ok_or_else(|| Error::Config("mediator script exhausted".into()))
    }
}

/// Sentence-producing mediator over an embedding space.
pub struct TextMediator {
    pub config: MediatorConfig,
    pub option: MediatorOption,
    pub topic: String,
    pub request: RequestOptions,
    llm: Arc<dyn LlmProvider>,
    embedder: Arc<dyn Embedder>,
}

impl TextMediator {
    pub fn new(
        config: MediatorConfig,
        topic: impl Into<String>,
        llm: Arc<dyn LlmProvider>,
        embedder: Arc<dyn Embedder>,
    ) -> Result<Self> {
        config.validate()?;
        let option = config
            .text_option
            .ok_or_else(|| Error::Config("text mediator needs a mediator option".into()))?;
        Ok(TextMediator {
            config,
            option,
            topic: topic.into(),
            request: RequestOptions::default(),
            llm,
            embedder,
        })
    }

    pub fn with_request_options(mut self, request: RequestOptions) -> Self {
        self.request = request;
        self
    }

    /// A compromise sentence for `ci` and `cj`, embedded.
    pub fn compromise_text(
        &self,
        space: &EmbeddingSpace,
        ci: &Coalition<EmbedVec>,
        cj: &Coalition<EmbedVec>,
        seed: u64,
    ) -> Result<EmbedVec> {
        let llm = self.llm.as_ref();
        let embedder = self.embedder.as_ref();
        let sentence = |c: &Coalition<EmbedVec>| {
            c.point
                .source_text()
                .map(str::to_string)
                .ok_or(Error::Empty("coalition sentence"))
        };
        match self.option {
            MediatorOption::Random => {
                let s = text::generate_random_sentence(llm, &self.request, seed)?;
                text::embed(&s, embedder)
            }
            MediatorOption::Single => {
                let s = text::generate_single_aggregate(
                    &sentence(ci)?,
                    &sentence(cj)?,
                    &self.topic,
                    llm,
                    &self.request,
                    seed,
                )?;
                text::embed(&s, embedder)
            }
            _ => {
                let candidates = text::generate_candidates(
                    &sentence(ci)?,
                    &sentence(cj)?,
                    self.option.template(),
                    self.config.candidate_count,
                    &self.topic,
                    llm,
                    &self.request,
                    seed,
                )?;
                let target = compromise(space, ci, cj)?;
                let embedded = candidates
                    .iter()
                    .map(|c| text::embed(c, embedder))
                    .collect::<Result<Vec<_>>>()?;
                closest_candidate(space, embedded, &target)
            }
        }
    }
}

/// The candidate nearest to `target`, first one on ties.
pub fn closest_candidate<S: MetricSpace>(space: &S, candidates: Vec<S::Point>, target: &S::Point) -> Result<S::Point> {
    let mut best: Option<(S::Point, f64)> = None;
    for c in candidates {
        let d = space.dist(&c, target)?;
        if best.as_ref().is_none_or(|(_, bd)| d < *bd) {
            best = Some((c, d));
        }
    }
    best.map(|(c, _)| c).ok_or(Error::Empty("candidate list"))
}

impl Mediator<EmbeddingSpace> for TextMediator {
    fn propose(
        &mut self,
        space: &EmbeddingSpace,
        structure: &CoalitionStructure<EmbedVec>,
        rng: &mut RunRng,
    ) -> Result<MediatorProposal<EmbedVec>> {
        let (i, j) = select_pair(space, structure, self.config.alpha, rng)?;
        let seed: u64 = rng.random();
        let point = self.compromise_text(space, &structure.coalitions()[i], &structure.coalitions()[j], seed)?;
        Ok(MediatorProposal { i, j, point })
    }
}
