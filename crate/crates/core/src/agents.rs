//! Agents and their approval rule.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::metric::MetricSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An agent with an ideal point and altruism `sigma`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agent<P> {
    pub id: AgentId,
    pub ideal: P,
    pub sigma: f64,
}

impl<P> Agent<P> {
    pub fn new(id: u32, ideal: P, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::Config(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        Ok(Agent {
            id: AgentId(id),
            ideal,
            sigma,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vote {
    Reject,
    Approve,
}

impl Vote {
    pub fn is_approve(self) -> bool {
        self == Vote::Approve
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Vote::Reject => 0,
            Vote::Approve => 1,
        }
    }
}

impl Serialize for Vote {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_u8())
    }
}

/// Probability that an agent with the given ideal point approves `proposal`.
///
/// Proposals at least as close as the status quo are always approved.
/// Otherwise approval follows a half-Gaussian in `d(ideal, proposal)` of
/// width `sigma`, capped at 1; `sigma = 0` gives the deterministic agent.
pub fn approval_probability<S: MetricSpace>(
    space: &S,
    status_quo: &S::Point,
    proposal: &S::Point,
    ideal: &S::Point,
    sigma: f64,
) -> Result<f64> {
    let to_status_quo = space.dist(ideal, status_quo)?;
    let to_proposal = space.dist(ideal, proposal)?;
    Ok(half_gaussian_approval(to_status_quo, to_proposal, sigma))
}

/// [`approval_probability`] on precomputed distances.
pub fn half_gaussian_approval(to_status_quo: f64, to_proposal: f64, sigma: f64) -> f64 {
    if to_status_quo >= to_proposal {
        return 1.0;
    }
    if sigma == 0.0 {
        return 0.0;
    }
    let density = 2.0 / (sigma * (2.0 * PI).sqrt())
        * (-(to_proposal * to_proposal) / (2.0 * sigma * sigma)).exp();
    density.min(1.0)
}

/// Draws exactly one uniform from `rng` and approves iff it falls below the
/// approval probability.
pub fn vote<S: MetricSpace, R: Rng + ?Sized>(
    agent: &Agent<S::Point>,
    space: &S,
    status_quo: &S::Point,
    proposal: &S::Point,
    rng: &mut R,
) -> Result<Vote> {
    let prob = approval_probability(space, status_quo, proposal, &agent.ideal, agent.sigma)?;
    let u: f64 = rng.random();
    Ok(if u < prob { Vote::Approve } else { Vote::Reject })
}
