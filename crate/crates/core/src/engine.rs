//! Coalition structures, constitutions and the iterative process loop.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agents::{vote, Agent, AgentId, Vote};
use crate::error::{Error, Result};
use crate::mediator::{Mediator, MediatorProposal};
use crate::metric::MetricSpace;
use crate::RunRng;

pub const DEFAULT_ITERATION_CAP: usize = 10_000;

/// A non-empty set of agents gathered around a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coalition<P> {
    members: Vec<AgentId>,
    pub point: P,
}

impl<P> Coalition<P> {
    /// Members are kept sorted; an empty member list is rejected.
    pub fn new(mut members: Vec<AgentId>, point: P) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Partition("empty coalition".into()));
        }
        members.sort_unstable();
        members.dedup();
        Ok(Coalition { members, point })
    }

    pub fn members(&self) -> &[AgentId] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, id: AgentId) -> bool {
        self.members.binary_search(&id).is_ok()
    }
}

/// An ordered partition of the agents into coalitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CoalitionStructure<P> {
    coalitions: Vec<Coalition<P>>,
}

impl<P> CoalitionStructure<P> {
    pub fn new(coalitions: Vec<Coalition<P>>) -> Self {
        CoalitionStructure { coalitions }
    }

    /// One coalition per agent, in agent order.
    pub fn singletons<'a>(agents: impl IntoIterator<Item = (&'a AgentId, P)>) -> Self {
        let coalitions = agents
            .into_iter()
            .map(|(id, point)| Coalition {
                members: vec![*id],
                point,
            })
            .collect();
        CoalitionStructure { coalitions }
    }

    pub fn coalitions(&self) -> &[Coalition<P>] {
        &self.coalitions
    }

    pub fn get(&self, index: usize) -> Option<&Coalition<P>> {
        self.coalitions.get(index)
    }

    pub fn len(&self) -> usize {
        self.coalitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coalitions.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.coalitions.iter().map(Coalition::size).collect()
    }

    pub fn total_members(&self) -> usize {
        self.coalitions.iter().map(Coalition::size).sum()
    }

    /// Checks that the coalitions are non-empty, pairwise disjoint and cover
    /// exactly `agents`.
    pub fn check_partition(&self, agents: &[AgentId]) -> Result<()> {
        let mut seen: Vec<AgentId> = Vec::with_capacity(agents.len());
        for (i, c) in self.coalitions.iter().enumerate() {
            if c.members.is_empty() {
                return Err(Error::Partition(format!("coalition {i} is empty")));
            }
            seen.extend_from_slice(&c.members);
        }
        seen.sort_unstable();
        let mut expected = agents.to_vec();
        expected.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Partition("an agent belongs to two coalitions".into()));
        }
        if seen != expected {
            return Err(Error::Partition(format!(
                "coalitions cover {} agents, expected {}",
                seen.len(),
                expected.len()
            )));
        }
        Ok(())
    }
}

/// How a coalition aggregates its members' votes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DisciplinePolicy {
    /// Every approver moves.
    #[default]
    None,
    /// Approvers move only if at least `ceil(q·|C|)` members approve.
    Quota(f64),
    /// Approvers move only if every member approves.
    Unanimity,
}

impl DisciplinePolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            DisciplinePolicy::Quota(q) if !(*q > 0.0 && *q <= 1.0) => Err(Error::Config(format!(
                "discipline quota must lie in (0, 1], got {q}"
            ))),
            _ => Ok(()),
        }
    }

    /// Minimum number of approvers for anyone in a coalition of `size` to move.
    pub fn threshold(&self, size: usize) -> usize {
        match self {
            DisciplinePolicy::None => 0,
            DisciplinePolicy::Quota(q) => (q * size as f64 - 1e-9).ceil().max(0.0) as usize,
            DisciplinePolicy::Unanimity => size,
        }
    }
}

impl fmt::Display for DisciplinePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DisciplinePolicy::None => f.write_str("none"),
            DisciplinePolicy::Quota(q) => write!(f, "quota:{q}"),
            DisciplinePolicy::Unanimity => f.write_str("unanimity"),
        }
    }
}

impl FromStr for DisciplinePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let policy = match s.as_str() {
            "none" | "false" => DisciplinePolicy::None,
            "unanimity" | "true" => DisciplinePolicy::Unanimity,
            other => {
                let q = other
                    .strip_prefix("quota:")
                    .and_then(|q| q.parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown discipline `{other}`")))?;
                DisciplinePolicy::Quota(q)
            }
        };
        policy.validate()?;
        Ok(policy)
    }
}

impl Serialize for DisciplinePolicy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DisciplinePolicy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Assignment {
    Stay,
    Move,
}

/// Maps each member's vote to stay or move under `policy`.
pub fn apply_constitution<P>(
    coalition: &Coalition<P>,
    votes: &BTreeMap<AgentId, Vote>,
    policy: DisciplinePolicy,
) -> Result<BTreeMap<AgentId, Assignment>> {
    if votes.len() != coalition.size() || coalition.members.iter().any(|m| !votes.contains_key(m)) {
        return Err(Error::VoteMismatch);
    }
    let approvers = votes.values().filter(|v| v.is_approve()).count();
    let enough = approvers >= policy.threshold(coalition.size());
    Ok(votes
        .iter()
        .map(|(id, v)| {
            let a = if enough && v.is_approve() {
                Assignment::Move
            } else {
                Assignment::Stay
            };
            (*id, a)
        })
        .collect())
}

/// Applies a proposal to the structure.
///
/// Stayers of `i` and `j` keep their coalitions and points in place; movers
/// from both form a new coalition at the proposal point, appended last.
/// Coalitions left empty are dropped.
pub fn step<P: Clone>(
    structure: &CoalitionStructure<P>,
    proposal: &MediatorProposal<P>,
    assign_i: &BTreeMap<AgentId, Assignment>,
    assign_j: &BTreeMap<AgentId, Assignment>,
) -> Result<CoalitionStructure<P>> {
    let (i, j) = (proposal.i, proposal.j);
    let len = structure.len();
    if i == j || i >= len || j >= len {
        return Err(Error::InvalidProposal { i, j, len });
    }
    let mut movers = Vec::new();
    let mut coalitions = Vec::with_capacity(len + 1);
    for (k, c) in structure.coalitions.iter().enumerate() {
        let assign = if k == i {
            assign_i
        } else if k == j {
            assign_j
        } else {
            coalitions.push(c.clone());
            continue;
        };
        let mut stayers = Vec::with_capacity(c.size());
        for m in &c.members {
            match assign.get(m) {
                Some(Assignment::Move) => movers.push(*m),
                Some(Assignment::Stay) => stayers.push(*m),
                None => return Err(Error::VoteMismatch),
            }
        }
        if !stayers.is_empty() {
            coalitions.push(Coalition {
                members: stayers,
                point: c.point.clone(),
            });
        }
    }
    if !movers.is_empty() {
        coalitions.push(Coalition::new(movers, proposal.point.clone())?);
    }
    Ok(CoalitionStructure { coalitions })
}

/// Population share a coalition needs for the process to halt.
///
/// `0.5` means a strict majority, `|C| >= floor(n/2) + 1`; any other value
/// `q` means `|C| / n >= q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HaltQuota(f64);

impl HaltQuota {
    pub const MAJORITY: HaltQuota = HaltQuota(0.5);

    pub fn new(q: f64) -> Result<Self> {
        if q > 0.0 && q <= 1.0 {
            Ok(HaltQuota(q))
        } else {
            Err(Error::Config(format!("halt quota must lie in (0, 1], got {q}")))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// Smallest coalition size that halts a population of `n`.
    pub fn threshold(&self, n: usize) -> usize {
        if self.0 == 0.5 {
            return n / 2 + 1;
        }
        let mut k = ((self.0 * n as f64).floor() as usize).saturating_sub(1);
        while (k as f64) / (n as f64) < self.0 {
            k += 1;
        }
        k.max(1)
    }
}

impl Default for HaltQuota {
    fn default() -> Self {
        HaltQuota::MAJORITY
    }
}

/// Index of the first coalition reaching the quota.
pub fn check_halt<P>(structure: &CoalitionStructure<P>, n: usize, quota: HaltQuota) -> Option<usize> {
    let needed = quota.threshold(n);
    structure.coalitions.iter().position(|c| c.size() >= needed)
}

/// Record of a single mediator proposal and its outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord<P> {
    pub iteration: usize,
    pub pair: (usize, usize),
    pub proposal: P,
    pub votes: BTreeMap<AgentId, Vote>,
    pub accepted: usize,
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    /// The iteration cap was reached.
    CapReached,
    /// A single coalition remains below the halting quota.
    Stalled,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Converged => "converged",
            RunStatus::CapReached => "cap_reached",
            RunStatus::Stalled => "stalled",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult<P> {
    pub seed: u64,
    pub status: RunStatus,
    pub converged: bool,
    pub iterations: usize,
    pub winning_coalition: Option<Coalition<P>>,
    pub quality: Option<f64>,
    pub coalition_count: usize,
    pub largest_size: usize,
    pub trace: Vec<IterationRecord<P>>,
}

/// Everything fixed before the first iteration.
#[derive(Debug, Clone)]
pub struct Scenario<P> {
    pub seed: u64,
    pub status_quo: P,
    pub agents: Vec<Agent<P>>,
    /// Singleton coalition points, one per agent in agent order.
    pub initial_points: Vec<P>,
}

impl<P: Clone> Scenario<P> {
    /// Initial points equal to the ideal points.
    pub fn from_ideals(seed: u64, status_quo: P, agents: Vec<Agent<P>>) -> Self {
        let initial_points = agents.iter().map(|a| a.ideal.clone()).collect();
        Scenario {
            seed,
            status_quo,
            agents,
            initial_points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents.is_empty() {
            return Err(Error::Config("at least one agent is required".into()));
        }
        if self.initial_points.len() != self.agents.len() {
            return Err(Error::Config("one initial point per agent is required".into()));
        }
        let mut ids: Vec<_> = self.agents.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("agent ids must be unique".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessConfig {
    pub discipline: DisciplinePolicy,
    pub halt_quota: HaltQuota,
    pub iteration_cap: usize,
    pub record_trace: bool,
}

impl Default for ProcessConfig {
    fn default() -> Self {
        ProcessConfig {
            discipline: DisciplinePolicy::None,
            halt_quota: HaltQuota::MAJORITY,
            iteration_cap: DEFAULT_ITERATION_CAP,
            record_trace: true,
        }
    }
}

/// Runs the process from singleton coalitions until halt, stall or cap.
///
/// Agents of coalition `i` vote before those of `j`, each in ascending id
/// order, all drawing from `rng`.
pub fn run_process<S, M>(
    space: &S,
    scenario: &Scenario<S::Point>,
    config: &ProcessConfig,
    mediator: &mut M,
    rng: &mut RunRng,
) -> Result<RunResult<S::Point>>
where
    S: MetricSpace,
    M: Mediator<S> + ?Sized,
{
    scenario.validate()?;
    config.discipline.validate()?;
    let n = scenario.agents.len();
    let index: BTreeMap<AgentId, usize> = scenario
        .agents
        .iter()
        .enumerate()
        .map(|(k, a)| (a.id, k))
        .collect();
    let mut structure = CoalitionStructure::singletons(
        scenario
            .agents
            .iter()
            .map(|a| &a.id)
            .zip(scenario.initial_points.iter().cloned()),
    );
    let mut trace = Vec::new();
    let mut iterations = 0;

    let status = loop {
        if check_halt(&structure, n, config.halt_quota).is_some() {
            break RunStatus::Converged;
        }
        if iterations >= config.iteration_cap {
            break RunStatus::CapReached;
        }
        if structure.len() < 2 {
            break RunStatus::Stalled;
        }
        iterations += 1;

        let proposal = mediator.propose(space, &structure, rng)?;
        let (ci, cj) = match (structure.get(proposal.i), structure.get(proposal.j)) {
            (Some(a), Some(b)) if proposal.i != proposal.j => (a, b),
            _ => {
                return Err(Error::InvalidProposal {
                    i: proposal.i,
                    j: proposal.j,
                    len: structure.len(),
                })
            }
        };
        let mut cast = |c: &Coalition<S::Point>| -> Result<BTreeMap<AgentId, Vote>> {
            c.members()
                .iter()
                .map(|id| {
                    let agent = &scenario.agents[index[id]];
                    vote(agent, space, &scenario.status_quo, &proposal.point, rng).map(|v| (*id, v))
                })
                .collect()
        };
        let votes_i = cast(ci)?;
        let votes_j = cast(cj)?;
        let assign_i = apply_constitution(ci, &votes_i, config.discipline)?;
        let assign_j = apply_constitution(cj, &votes_j, config.discipline)?;
        let accepted = assign_i
            .values()
            .chain(assign_j.values())
            .filter(|a| **a == Assignment::Move)
            .count();
        structure = step(&structure, &proposal, &assign_i, &assign_j)?;

        if config.record_trace {
            let mut votes = votes_i;
            votes.extend(votes_j);
            trace.push(IterationRecord {
                iteration: iterations,
                pair: (proposal.i, proposal.j),
                proposal: proposal.point,
                votes,
                accepted,
                sizes: structure.sizes(),
            });
        }
    };

    let winner = match status {
        RunStatus::Converged => check_halt(&structure, n, config.halt_quota)
            .and_then(|w| structure.get(w))
            .cloned(),
        _ => None,
    };
    let quality = match &winner {
        Some(c) => Some(coalition_quality(space, scenario, &index, c)?),
        None => None,
    };
    Ok(RunResult {
        seed: scenario.seed,
        status,
        converged: status == RunStatus::Converged,
        iterations,
        winning_coalition: winner,
        quality,
        coalition_count: structure.len(),
        largest_size: structure.sizes().into_iter().max().unwrap_or(0),
        trace,
    })
}

/// Mean distance from the coalition point to its members' ideal points.
fn coalition_quality<S: MetricSpace>(
    space: &S,
    scenario: &Scenario<S::Point>,
    index: &BTreeMap<AgentId, usize>,
    coalition: &Coalition<S::Point>,
) -> Result<f64> {
    let total = coalition
        .members()
        .iter()
        .map(|id| space.dist(&coalition.point, &scenario.agents[index[id]].ideal))
        .sum::<Result<f64>>()?;
    Ok(total / coalition.size() as f64)
}
