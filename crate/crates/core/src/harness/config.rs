//! Run configurations and batch grids.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{DisciplinePolicy, HaltQuota, ProcessConfig, DEFAULT_ITERATION_CAP};
use crate::error::{Error, Result};
use crate::harness::scenario::MAX_PEAKS;
use crate::mediator::{MediatorConfig, MediatorOption};
use crate::metric::SpaceKind;
use crate::text::{RequestOptions, DEFAULT_CANDIDATES, DEFAULT_MAX_RETRIES, DEFAULT_TEMPERATURE};

pub const DEFAULT_TOPIC: &str = "global warming";

fn default_quota() -> f64 {
    HaltQuota::MAJORITY.value()
}
fn default_cap() -> usize {
    DEFAULT_ITERATION_CAP
}
fn default_reps() -> usize {
    1
}
fn default_candidates() -> usize {
    DEFAULT_CANDIDATES
}
fn default_temperature() -> f64 {
    DEFAULT_TEMPERATURE
}
fn default_retries() -> u32 {
    DEFAULT_MAX_RETRIES
}

/// One point of a parameter grid, repeated `repetitions` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(with = "space_str")]
    pub space: SpaceKind,
    pub n: usize,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub discipline: DisciplinePolicy,
    #[serde(default)]
    pub noise_init: bool,
    #[serde(default = "default_quota")]
    pub halt_quota: f64,
    #[serde(default = "default_cap")]
    pub iteration_cap: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gmm_peaks: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mediator_option: Option<MediatorOption>,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default = "default_candidates")]
    pub candidate_count: usize,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
}

mod space_str {
    use super::SpaceKind;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: &SpaceKind, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<SpaceKind, D::Error> {
        String::deserialize(de)?.parse().map_err(serde::de::Error::custom)
    }
}

impl RunConfig {
    pub fn euclid(n: usize) -> Self {
        RunConfig {
            space: SpaceKind::Euclid2D,
            n,
            sigma: 0.0,
            alpha: 0.0,
            discipline: DisciplinePolicy::None,
            noise_init: false,
            halt_quota: default_quota(),
            iteration_cap: DEFAULT_ITERATION_CAP,
            seed: 0,
            gmm_peaks: Some(0),
            topic: None,
            mediator_option: None,
            repetitions: 1,
            candidate_count: DEFAULT_CANDIDATES,
            temperature: DEFAULT_TEMPERATURE,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }

    pub fn text(n: usize, dimension: usize, topic: impl Into<String>, option: MediatorOption) -> Self {
        RunConfig {
            space: SpaceKind::Embedding { dimension },
            gmm_peaks: None,
            topic: Some(topic.into()),
            mediator_option: Some(option),
            ..RunConfig::euclid(n)
        }
    }

    pub fn is_text(&self) -> bool {
        matches!(self.space, SpaceKind::Embedding { .. })
    }

    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::Config(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        self.mediator_config().validate()?;
        self.discipline.validate()?;
        HaltQuota::new(self.halt_quota)?;
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.is_text() {
            if self.gmm_peaks.is_some() {
                return Err(Error::Config("gmm_peaks applies only to the euclid2d space".into()));
            }
            if self.topic.as_deref().is_none_or(|t| t.trim().is_empty()) {
                return Err(Error::Config("text runs need a topic".into()));
            }
            if self.mediator_option.is_none() {
                return Err(Error::Config("text runs need a mediator option".into()));
            }
            self.request_options().validate()?;
        } else {
            if self.topic.is_some() || self.mediator_option.is_some() {
                return Err(Error::Config("topic and mediator_option apply only to embedding spaces".into()));
            }
            match self.gmm_peaks {
                Some(g) if g <= MAX_PEAKS => {}
                Some(g) => return Err(Error::Config(format!("gmm_peaks must be in 0..={MAX_PEAKS}, got {g}"))),
                None => return Err(Error::Config("euclid2d runs need gmm_peaks".into())),
            }
        }
        Ok(())
    }

    pub fn process_config(&self, record_trace: bool) -> Result<ProcessConfig> {
        Ok(ProcessConfig {
            discipline: self.discipline,
            halt_quota: HaltQuota::new(self.halt_quota)?,
            iteration_cap: self.iteration_cap,
            record_trace,
        })
    }

    pub fn mediator_config(&self) -> MediatorConfig {
        MediatorConfig {
            alpha: self.alpha,
            text_option: self.mediator_option,
            candidate_count: self.candidate_count,
        }
    }

    pub fn request_options(&self) -> RequestOptions {
        RequestOptions {
            temperature: self.temperature,
            max_retries: self.max_retries,
        }
    }
}

/// A scalar or a list in a grid file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> Axis<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            Axis::One(v) => vec![v.clone()],
            Axis::Many(v) => v.clone(),
        }
    }
}

impl<T> From<T> for Axis<T> {
    fn from(v: T) -> Self {
        Axis::One(v)
    }
}

/// A grid of configurations sharing one master seed. Axes expand as a
/// Cartesian product with `n` outermost, then `sigma`, `alpha`,
/// `discipline`, `noise_init`, `gmm_peaks` and `mediator_option`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    pub master_seed: u64,
    #[serde(default = "default_space")]
    pub space: String,
    pub n: Axis<usize>,
    #[serde(default = "zero_axis")]
    pub sigma: Axis<f64>,
    #[serde(default = "zero_axis")]
    pub alpha: Axis<f64>,
    #[serde(default = "no_discipline")]
    pub discipline: Axis<DisciplinePolicy>,
    #[serde(default = "no_noise")]
    pub noise_init: Axis<bool>,
    #[serde(default)]
    pub gmm_peaks: Option<Axis<u8>>,
    #[serde(default)]
    pub mediator_option: Option<Axis<MediatorOption>>,
    #[serde(default)]
    pub topic: Option<String>,
    #[serde(default = "default_quota")]
    pub halt_quota: f64,
    #[serde(default = "default_cap")]
    pub iteration_cap: usize,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default = "default_candidates")]
    pub candidate_count: usize,
}

fn default_space() -> String {
    "euclid2d".into()
}
fn zero_axis() -> Axis<f64> {
    Axis::One(0.0)
}
fn no_discipline() -> Axis<DisciplinePolicy> {
    Axis::One(DisciplinePolicy::None)
}
fn no_noise() -> Axis<bool> {
    Axis::One(false)
}

impl BatchConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&raw).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn expand(&self) -> Result<Vec<RunConfig>> {
        let space: SpaceKind = self.space.parse()?;
        let text = matches!(space, SpaceKind::Embedding { .. });
        let peaks: Vec<Option<u8>> = match (&self.gmm_peaks, text) {
            (Some(_), true) => return Err(Error::Config("gmm_peaks applies only to the euclid2d space".into())),
            (Some(a), false) => a.values().into_iter().map(Some).collect(),
            (None, true) => vec![None],
            (None, false) => vec![Some(0)],
        };
        let options: Vec<Option<MediatorOption>> = match &self.mediator_option {
            Some(a) => a.values().into_iter().map(Some).collect(),
            None => vec![None],
        };
        let topic = match (&self.topic, text) {
            (Some(t), _) => Some(t.clone()),
            (None, true) => Some(DEFAULT_TOPIC.to_string()),
            (None, false) => None,
        };
        let mut out = Vec::new();
        for n in self.n.values() {
            for sigma in self.sigma.values() {
                for alpha in self.alpha.values() {
                    for discipline in self.discipline.values() {
                        for noise_init in self.noise_init.values() {
                            for gmm_peaks in &peaks {
                                for mediator_option in &options {
                                    let cfg = RunConfig {
                                        space,
                                        n,
                                        sigma,
                                        alpha,
                                        discipline,
                                        noise_init,
                                        halt_quota: self.halt_quota,
                                        iteration_cap: self.iteration_cap,
                                        seed: self.master_seed,
                                        gmm_peaks: *gmm_peaks,
                                        topic: topic.clone(),
                                        mediator_option: *mediator_option,
                                        repetitions: self.repetitions,
                                        candidate_count: self.candidate_count,
                                        temperature: DEFAULT_TEMPERATURE,
                                        max_retries: DEFAULT_MAX_RETRIES,
                                    };
                                    cfg.validate()?;
                                    out.push(cfg);
                                }
                            }
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::Config("batch grid is empty".into()));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_expands_in_documented_order() {
        let b: BatchConfig = serde_json::from_str(
            r#"{"master_seed": 3, "n": [10, 20], "alpha": [-1, 1], "discipline": ["none", "unanimity"], "repetitions": 5}"#,
        )
        .unwrap();
        let cfgs = b.expand().unwrap();
        assert_eq!(cfgs.len(), 8);
        assert_eq!((cfgs[0].n, cfgs[0].alpha, cfgs[0].discipline), (10, -1.0, DisciplinePolicy::None));
        assert_eq!(cfgs[1].discipline, DisciplinePolicy::Unanimity);
        assert_eq!(cfgs[2].alpha, 1.0);
        assert_eq!(cfgs[4].n, 20);
        assert!(cfgs.iter().all(|c| c.seed == 3 && c.repetitions == 5 && c.gmm_peaks == Some(0)));
    }

    #[test]
    fn text_grid_defaults_topic() {
        let b: BatchConfig = serde_json::from_str(
            r#"{"master_seed": 1, "space": "embedding:64", "n": 10, "mediator_option": [1, 4, 5]}"#,
        )
        .unwrap();
        let cfgs = b.expand().unwrap();
        assert_eq!(cfgs.len(), 3);
        assert_eq!(cfgs[0].topic.as_deref(), Some(DEFAULT_TOPIC));
        assert_eq!(cfgs[2].mediator_option, Some(MediatorOption::Random));
    }

    #[test]
    fn field_presence_rules() {
        let mut c = RunConfig::euclid(5);
        c.topic = Some("x".into());
        assert!(c.validate().is_err());
        let mut c = RunConfig::text(5, 16, "t", MediatorOption::Single);
        assert!(c.validate().is_ok());
        c.gmm_peaks = Some(1);
        assert!(c.validate().is_err());
        let mut c = RunConfig::euclid(5);
        c.alpha = 2.0;
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<BatchConfig>(r#"{"master_seed": 1, "n": 3, "bogus": 1}"#).is_err());
    }

    #[test]
    fn run_config_round_trips() {
        let c = RunConfig::text(7, 32, "t", MediatorOption::BestOfPersona);
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains(r#""space":"embedding:32""#), "{s}");
        assert_eq!(serde_json::from_str::<RunConfig>(&s).unwrap(), c);
    }
}
