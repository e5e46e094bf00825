//! Hand-written Euclidean instances loaded from JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::Agent;
use crate::engine::Scenario;
use crate::error::{Error, Result};
use crate::metric::Point2D;

/// A fixed status quo and ideal points, optionally with explicit starting
/// coalition points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EuclidFixture {
    #[serde(default)]
    pub labels: Vec<String>,
    pub status_quo: Point2D,
    pub ideals: Vec<Point2D>,
    #[serde(default)]
    pub initial_points: Option<Vec<Point2D>>,
}

impl EuclidFixture {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let f: EuclidFixture =
            serde_json::from_str(&raw).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ideals.is_empty() {
            return Err(Error::Config("fixture has no agents".into()));
        }
        if !self.labels.is_empty() && self.labels.len() != self.ideals.len() {
            return Err(Error::Config("one label per ideal point".into()));
        }
        if let Some(init) = &self.initial_points {
            if init.len() != self.ideals.len() {
                return Err(Error::Config("one initial point per ideal point".into()));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.ideals.len()
    }

    /// Agents get ids in file order, all with the same `sigma`.
    pub fn scenario(&self, sigma: f64, seed: u64) -> Result<Scenario<Point2D>> {
        self.validate()?;
        let agents = self
            .ideals
            .iter()
            .enumerate()
            .map(|(k, p)| Agent::new(k as u32, *p, sigma))
            .collect::<Result<Vec<_>>>()?;
        let initial_points = self.initial_points.clone().unwrap_or_else(|| self.ideals.clone());
        Ok(Scenario {
            seed,
            status_quo: self.status_quo,
            agents,
            initial_points,
        })
    }
}
