//! Deterministic offline providers.
//!
//! [`MockLlm`] writes sentences from a small climate-policy grammar and
//! blends two sentences word by word; [`HashEmbedder`] maps text to a unit
//! vector built from hash-seeded word and bigram vectors, so sentences that
//! share words land close together. Both are pure functions of their seed
//! and the request.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex, RwLock};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Embedder, LlmProvider, LlmRequest, TemplateId};
use crate::error::ProviderError;

/// 64-bit FNV-1a over a sequence of byte strings, with a separator byte.
pub fn stable_hash(seed: u64, parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for part in parts {
        for b in *part {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

const ACTORS: &[&str] = &[
    "Governments", "Cities", "Communities", "Companies", "Farmers", "Schools", "Citizens",
    "Industries", "Nations", "Households", "Local councils", "Global leaders",
];
const MODALS: &[&str] = &["should", "must", "can", "need to"];
const VERBS: &[&str] = &[
    "invest in", "expand", "promote", "subsidize", "protect", "adopt", "restore", "fund",
    "support", "prioritize", "tax", "phase out",
];
const OBJECTS: &[&str] = &[
    "renewable energy", "public transport", "solar panels", "wind farms", "electric vehicles",
    "forests and wetlands", "energy efficiency", "carbon pricing", "green buildings",
    "sustainable farming", "coal plants", "plastic waste", "water conservation",
    "climate education",
];
const CONNECTORS: &[&str] = &["to", "in order to", "so we can"];
const GOALS: &[&str] = &[
    "cut carbon emissions", "slow rising temperatures", "protect future generations",
    "reduce fossil fuel use", "limit global warming", "build climate resilience",
    "lower greenhouse gases", "save natural habitats",
];

fn pick<'a, R: Rng + ?Sized>(rng: &mut R, words: &'a [&'a str]) -> &'a str {
    words.choose(rng).copied().unwrap_or("")
}

fn grammar_sentence<R: Rng + ?Sized>(rng: &mut R) -> String {
    format!(
        "{} {} {} {} {} {}.",
        pick(rng, ACTORS),
        pick(rng, MODALS),
        pick(rng, VERBS),
        pick(rng, OBJECTS),
        pick(rng, CONNECTORS),
        pick(rng, GOALS)
    )
}

fn vocabulary() -> Vec<&'static str> {
    [ACTORS, MODALS, VERBS, OBJECTS, CONNECTORS, GOALS]
        .iter()
        .flat_map(|list| list.iter().flat_map(|p| p.split_whitespace()))
        .collect()
}

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

fn finish(mut tokens: Vec<String>) -> String {
    if let Some(first) = tokens.first_mut() {
        let mut cs = first.chars();
        if let Some(c) = cs.next() {
            *first = c.to_uppercase().chain(cs).collect();
        }
    }
    let mut s = tokens.join(" ");
    s = s.trim_end_matches(['.', ',']).to_string();
    s.push('.');
    s
}

/// Word-level crossover of two sentences with occasional substitutions.
fn blend<R: Rng + ?Sized>(a: &str, b: &str, vocab: &[&str], rng: &mut R) -> String {
    let (wa, wb) = (words(a), words(b));
    let len = if rng.random_bool(0.5) { wa.len() } else { wb.len() }.clamp(1, super::WORD_LIMIT);
    let tokens = (0..len)
        .filter_map(|k| {
            let from_a = rng.random_bool(0.5);
            let w = match (wa.get(k), wb.get(k)) {
                (Some(x), Some(y)) => {
                    if from_a {
                        *x
                    } else {
                        *y
                    }
                }
                (Some(x), None) => *x,
                (None, Some(y)) => *y,
                (None, None) => return None,
            };
            Some(if rng.random_bool(0.15) { pick(rng, vocab) } else { w })
        })
        .map(|w| w.trim_end_matches(['.', ',']).to_lowercase())
        .collect();
    finish(tokens)
}

fn perturb<R: Rng + ?Sized>(s: &str, vocab: &[&str], rng: &mut R) -> String {
    let tokens = words(s)
        .into_iter()
        .map(|w| {
            if rng.random_bool(0.25) {
                pick(rng, vocab).to_lowercase()
            } else {
                w.trim_end_matches(['.', ',']).to_lowercase()
            }
        })
        .collect();
    finish(tokens)
}

/// Deterministic token permutation that differs from the input whenever the
/// sentence has two distinct tokens.
fn shuffle_tokens(s: &str, seed: u64) -> String {
    let original: Vec<String> = words(s).iter().map(|w| w.trim_end_matches(['.', ',']).to_lowercase()).collect();
    let mut tokens = original.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(stable_hash(seed, &[s.as_bytes()]));
    rand::seq::SliceRandom::shuffle(tokens.as_mut_slice(), &mut rng);
    if tokens == original && tokens.len() > 1 {
        tokens.rotate_left(1);
    }
    finish(tokens)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockStyle {
    /// Grammar-generated sentences and word-level blends.
    Synthetic,
    /// Repeats its inputs back.
    Echo,
    /// Like `Synthetic`, but resembling sentences are token permutations.
    Shuffle,
}

/// Offline stand-in for a chat model.
#[derive(Debug, Clone)]
pub struct MockLlm {
    seed: u64,
    style: MockStyle,
    vocab: Vec<&'static str>,
}

impl MockLlm {
    pub fn new(seed: u64) -> Self {
        MockLlm::with_style(seed, MockStyle::Synthetic)
    }

    pub fn with_style(seed: u64, style: MockStyle) -> Self {
        MockLlm {
            seed,
            style,
            vocab: vocabulary(),
        }
    }

    fn numbered(items: impl IntoIterator<Item = String>) -> String {
        items
            .into_iter()
            .enumerate()
            .map(|(k, s)| format!("{}) {s}", k + 1))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl LlmProvider for MockLlm {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, req: &LlmRequest) -> Result<String, ProviderError> {
        let call_seed = req.seed.unwrap_or(0).to_le_bytes();
        let mut rng = ChaCha8Rng::seed_from_u64(stable_hash(
            self.seed,
            &[
                req.template.to_string().as_bytes(),
                req.system_message.as_bytes(),
                req.user_prompt.as_bytes(),
                &call_seed,
            ],
        ));
        let b = &req.bindings;
        let count = b.count.unwrap_or(1);
        let first = b.first.as_deref().unwrap_or("");
        let second = b.second.as_deref().unwrap_or("");
        let reply = match req.template {
            TemplateId::IdealGen => Self::numbered((0..count).map(|_| grammar_sentence(&mut rng))),
            TemplateId::ResembleInit => {
                let z = b.sentence.as_deref().unwrap_or("");
                match self.style {
                    MockStyle::Echo => z.to_string(),
                    MockStyle::Shuffle => shuffle_tokens(z, self.seed),
                    MockStyle::Synthetic => perturb(z, &self.vocab, &mut rng),
                }
            }
            TemplateId::Mediator1 | TemplateId::Mediator2 | TemplateId::Mediator3 | TemplateId::Mediator4 => {
                match self.style {
                    MockStyle::Echo => Self::numbered(
                        (0..count).map(|k| if k % 2 == 0 { first.to_string() } else { second.to_string() }),
                    ),
                    _ => Self::numbered((0..count).map(|_| blend(first, second, &self.vocab, &mut rng))),
                }
            }
            TemplateId::Mediator5 => match self.style {
                MockStyle::Echo => "A completely random sentence.".to_string(),
                _ => grammar_sentence(&mut rng),
            },
        };
        Ok(reply)
    }
}

/// Replies from a fixed script, in order; records every request it sees.
#[derive(Debug, Default)]
pub struct ScriptedLlm {
    replies: Mutex<VecDeque<Result<String, ProviderError>>>,
    seen: Mutex<Vec<LlmRequest>>,
}

impl ScriptedLlm {
    pub fn new<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        ScriptedLlm::from_outcomes(replies.into_iter().map(|r| Ok(r.into())).collect())
    }

    pub fn from_outcomes(outcomes: Vec<Result<String, ProviderError>>) -> Self {
        ScriptedLlm {
            replies: Mutex::new(outcomes.into()),
            seen: Mutex::default(),
        }
    }

    pub fn prompts(&self) -> Vec<String> {
        self.seen.lock().unwrap().iter().map(|r| r.user_prompt.clone()).collect()
    }

    pub fn seeds(&self) -> Vec<Option<u64>> {
        self.seen.lock().unwrap().iter().map(|r| r.seed).collect()
    }

    pub fn requests(&self) -> Vec<LlmRequest> {
        self.seen.lock().unwrap().clone()
    }
}

impl LlmProvider for ScriptedLlm {
    fn name(&self) -> &str {
        "scripted"
    }

    fn complete(&self, req: &LlmRequest) -> Result<String, ProviderError> {
        self.seen.lock().unwrap().push(req.clone());
        self.replies
            .lock()
            .unwrap()
            .pop_front()
            .unwrap_or_else(|| Err(ProviderError::Config("script exhausted".into())))
    }
}

const BIGRAM_WEIGHT: f64 = 0.5;

/// Hash-seeded bag of words and bigrams, normalized to unit length.
#[derive(Debug)]
pub struct HashEmbedder {
    dimension: usize,
    seed: u64,
    features: RwLock<HashMap<String, Arc<[f64]>>>,
}

impl HashEmbedder {
    pub fn new(dimension: usize, seed: u64) -> Self {
        HashEmbedder {
            dimension,
            seed,
            features: RwLock::default(),
        }
    }

    fn feature(&self, key: &str) -> Arc<[f64]> {
        if let Some(v) = self.features.read().unwrap().get(key) {
            return v.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(stable_hash(self.seed, &[key.as_bytes()]));
        let v: Arc<[f64]> = (0..self.dimension).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        self.features.write().unwrap().insert(key.to_string(), v.clone());
        v
    }
}

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

impl Embedder for HashEmbedder {
    fn name(&self) -> &str {
        "hash"
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_raw(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let toks = tokens(text);
        let mut acc = vec![0.0; self.dimension];
        let mut add = |key: &str, weight: f64| {
            for (a, f) in acc.iter_mut().zip(self.feature(key).iter()) {
                *a += weight * f;
            }
        };
        if toks.is_empty() {
            add(&format!("raw:{text}"), 1.0);
        }
        for t in &toks {
            add(t, 1.0);
        }
        for pair in toks.windows(2) {
            add(&format!("{} {}", pair[0], pair[1]), BIGRAM_WEIGHT);
        }
        let norm = acc.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(ProviderError::Malformed("zero embedding".into()));
        }
        Ok(acc.into_iter().map(|a| a / norm).collect())
    }
}

/// Returns the same vector for every input. Test helper for dimension and
/// error paths.
#[derive(Debug, Clone)]
pub struct FixedEmbedder {
    dimension: usize,
    vector: Vec<f64>,
}

impl FixedEmbedder {
    pub fn new(dimension: usize, vector: Vec<f64>) -> Self {
        FixedEmbedder { dimension, vector }
    }
}

impl Embedder for FixedEmbedder {
    fn name(&self) -> &str {
        "fixed"
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_raw(&self, _text: &str) -> Result<Vec<f64>, ProviderError> {
        Ok(self.vector.clone())
    }
}
