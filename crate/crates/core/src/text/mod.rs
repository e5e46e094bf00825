//! Sentence generation and embedding providers for the text setting.
//!
//! The process only sees [`LlmProvider`] and [`Embedder`]. Concrete
//! implementations are an HTTP client pair, deterministic offline mocks, and
//! a transcript replayer that reproduces a recorded run call for call.

pub mod cache;
pub mod http;
pub mod mock;
pub mod parse;
pub mod prompts;
pub mod transcript;

use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ProviderError, Result};
use crate::metric::EmbedVec;

pub use cache::CachedEmbedder;
pub use http::{HttpConfig, HttpEmbedder, HttpLlm, InFlightLimiter};
pub use mock::{HashEmbedder, MockLlm, MockStyle, ScriptedLlm};
pub use parse::{parse_numbered, parse_single};
pub use prompts::{PromptBindings, PromptTemplate, TemplateId};
pub use transcript::{RecordingEmbedder, RecordingLlm, ReplayProvider, TranscriptEntry, TranscriptWriter};

pub const DEFAULT_TEMPERATURE: f64 = 0.75;
pub const DEFAULT_MAX_RETRIES: u32 = 3;
pub const DEFAULT_CANDIDATES: usize = 10;
pub const WORD_LIMIT: usize = 15;

/// A fully rendered chat request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub template: TemplateId,
    pub system_message: String,
    pub user_prompt: String,
    pub temperature: f64,
    /// Sampling seed forwarded to the provider.
    pub seed: Option<u64>,
    pub bindings: PromptBindings,
}

impl LlmRequest {
    pub fn render(template: TemplateId, bindings: PromptBindings, opts: &RequestOptions) -> Result<Self> {
        let (system_message, user_prompt) = template.template().render(&bindings)?;
        Ok(LlmRequest {
            template,
            system_message,
            user_prompt,
            temperature: opts.temperature,
            seed: None,
            bindings,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RequestOptions {
    pub temperature: f64,
    pub max_retries: u32,
}

impl Default for RequestOptions {
    fn default() -> Self {
        RequestOptions {
            temperature: DEFAULT_TEMPERATURE,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }
}

impl RequestOptions {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(Error::Config(format!(
                "temperature must lie in [0, 2], got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

pub trait LlmProvider: Send + Sync {
    fn name(&self) -> &str;

    fn complete(&self, request: &LlmRequest) -> Result<String, ProviderError>;

    /// Delay before re-request number `attempt` (0-based).
    fn backoff(&self, _attempt: u32) -> Duration {
        Duration::ZERO
    }
}

pub trait Embedder: Send + Sync {
    fn name(&self) -> &str;

    fn dimension(&self) -> usize;

    fn embed_raw(&self, text: &str) -> Result<Vec<f64>, ProviderError>;
}

impl<T: LlmProvider + ?Sized> LlmProvider for &T {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn complete(&self, request: &LlmRequest) -> Result<String, ProviderError> {
        (**self).complete(request)
    }
    fn backoff(&self, attempt: u32) -> Duration {
        (**self).backoff(attempt)
    }
}

impl<T: LlmProvider + ?Sized> LlmProvider for std::sync::Arc<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn complete(&self, request: &LlmRequest) -> Result<String, ProviderError> {
        (**self).complete(request)
    }
    fn backoff(&self, attempt: u32) -> Duration {
        (**self).backoff(attempt)
    }
}

impl<T: Embedder + ?Sized> Embedder for &T {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn embed_raw(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        (**self).embed_raw(text)
    }
}

impl<T: Embedder + ?Sized> Embedder for std::sync::Arc<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn embed_raw(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        (**self).embed_raw(text)
    }
}

/// Sends `request`, handing each reply to `accept` until it yields a value.
///
/// Transient transport failures and rejected replies are re-requested up to
/// `max_retries` times; attempt `k` uses sampling seed `seed + k`.
fn request_with_retries<T>(
    llm: &dyn LlmProvider,
    mut request: LlmRequest,
    opts: &RequestOptions,
    mut accept: impl FnMut(&str) -> Result<T, ProviderError>,
) -> Result<T, ProviderError> {
    let base_seed = request.seed;
    let mut last = ProviderError::EmptyReply;
    for attempt in 0..=opts.max_retries {
        if attempt > 0 {
            let delay = llm.backoff(attempt - 1);
            if !delay.is_zero() {
                std::thread::sleep(delay);
            }
        }
        request.seed = base_seed.map(|s| s.wrapping_add(attempt as u64));
        match llm.complete(&request) {
            Ok(reply) => match accept(&reply) {
                Ok(v) => return Ok(v),
                Err(e) => last = e,
            },
            Err(e) if e.is_transient() => last = e,
            Err(e) => return Err(e),
        }
        log::debug!("{} attempt {} failed: {last}", request.template, attempt + 1);
    }
    Err(last)
}

/// Asks for `n` ideal sentences on `topic`, re-requesting any shortfall.
pub fn generate_ideal_sentences<R: Rng + ?Sized>(
    topic: &str,
    n: usize,
    llm: &dyn LlmProvider,
    opts: &RequestOptions,
    rng: &mut R,
) -> Result<Vec<String>> {
    if n == 0 {
        return Err(Error::Config("at least one ideal sentence is required".into()));
    }
    let mut sentences: Vec<String> = Vec::with_capacity(n);
    let mut attempts = 0;
    let seed: u64 = rng.random();
    while sentences.len() < n {
        if attempts > opts.max_retries {
            return Err(Error::provider(
                "ideal sentence generation",
                ProviderError::UnderDelivery {
                    wanted: n,
                    got: sentences.len(),
                },
            ));
        }
        let missing = n - sentences.len();
        let bindings = PromptBindings {
            count: Some(missing),
            topic: Some(topic.to_string()),
            ..Default::default()
        };
        let mut request = LlmRequest::render(TemplateId::IdealGen, bindings, opts)?;
        request.seed = Some(seed.wrapping_add(attempts as u64 * 1_000));
        let batch = request_with_retries(llm, request, opts, |reply| {
            let items = parse::parse_lines_lenient(reply);
            if items.is_empty() {
                Err(ProviderError::EmptyReply)
            } else {
                Ok(items)
            }
        })
        .map_err(|e| Error::provider("ideal sentence generation", e))?;
        sentences.extend(batch.into_iter().take(missing));
        attempts += 1;
    }
    Ok(sentences)
}

/// One sentence resembling `sentence`, used for noisy initial coalitions.
pub fn generate_resembling(
    sentence: &str,
    llm: &dyn LlmProvider,
    opts: &RequestOptions,
    seed: u64,
) -> Result<String> {
    if sentence.trim().is_empty() {
        return Err(Error::Empty("sentence to resemble"));
    }
    let bindings = PromptBindings {
        sentence: Some(sentence.to_string()),
        ..Default::default()
    };
    let mut request = LlmRequest::render(TemplateId::ResembleInit, bindings, opts)?;
    request.seed = Some(seed);
    request_with_retries(llm, request, opts, |reply| {
        parse::parse_single(reply).ok_or(ProviderError::EmptyReply)
    })
    .map_err(|e| Error::provider("resembling sentence", e))
}

/// Candidate aggregations of `first` and `second` under mediator option 1–3.
pub fn generate_candidates(
    first: &str,
    second: &str,
    template: TemplateId,
    count: usize,
    topic: &str,
    llm: &dyn LlmProvider,
    opts: &RequestOptions,
    seed: u64,
) -> Result<Vec<String>> {
    if !matches!(template, TemplateId::Mediator1 | TemplateId::Mediator2 | TemplateId::Mediator3) {
        return Err(Error::Config(format!("{template} does not generate candidate lists")));
    }
    if count == 0 {
        return Err(Error::Config("candidate count must be at least 1".into()));
    }
    let bindings = PromptBindings {
        count: Some(count),
        topic: Some(topic.to_string()),
        first: Some(first.to_string()),
        second: Some(second.to_string()),
        ..Default::default()
    };
    let mut request = LlmRequest::render(template, bindings, opts)?;
    request.seed = Some(seed);
    let mut candidates = request_with_retries(llm, request, opts, |reply| {
        let items = parse_numbered(reply);
        if items.is_empty() {
            Err(ProviderError::NoCandidates)
        } else {
            Ok(items)
        }
    })
    .map_err(|e| Error::provider("compromise candidates", e))?;
    candidates.truncate(count);
    warn_over_limit(&candidates);
    Ok(candidates)
}

/// The option-1 prompt asking for exactly one sentence.
pub fn generate_single_aggregate(
    first: &str,
    second: &str,
    topic: &str,
    llm: &dyn LlmProvider,
    opts: &RequestOptions,
    seed: u64,
) -> Result<String> {
    let bindings = PromptBindings {
        count: Some(1),
        topic: Some(topic.to_string()),
        first: Some(first.to_string()),
        second: Some(second.to_string()),
        ..Default::default()
    };
    let mut request = LlmRequest::render(TemplateId::Mediator4, bindings, opts)?;
    request.seed = Some(seed);
    let sentence = request_with_retries(llm, request, opts, |reply| {
        parse::parse_single(reply).ok_or(ProviderError::EmptyReply)
    })
    .map_err(|e| Error::provider("single compromise sentence", e))?;
    warn_over_limit(std::slice::from_ref(&sentence));
    Ok(sentence)
}

/// A random sentence unrelated to any coalition.
pub fn generate_random_sentence(llm: &dyn LlmProvider, opts: &RequestOptions, seed: u64) -> Result<String> {
    let mut request = LlmRequest::render(TemplateId::Mediator5, PromptBindings::default(), opts)?;
    request.seed = Some(seed);
    request_with_retries(llm, request, opts, |reply| {
        parse::parse_single(reply).ok_or(ProviderError::EmptyReply)
    })
    .map_err(|e| Error::provider("random sentence", e))
}

fn warn_over_limit(sentences: &[String]) {
    for s in sentences {
        let words = parse::word_count(s);
        if words > WORD_LIMIT {
            log::warn!("candidate exceeds {WORD_LIMIT} words ({words}): {s}");
        }
    }
}

/// Embeds `text`, tagging the vector with it.
pub fn embed(text: &str, embedder: &dyn Embedder) -> Result<EmbedVec> {
    if text.trim().is_empty() {
        return Err(Error::Empty("text to embed"));
    }
    let raw = embedder
        .embed_raw(text)
        .map_err(|e| Error::provider("embedding", e))?;
    if raw.len() != embedder.dimension() {
        return Err(Error::provider(
            "embedding",
            ProviderError::EmbeddingDimension {
                expected: embedder.dimension(),
                found: raw.len(),
            },
        ));
    }
    Ok(EmbedVec::new(raw)?.with_text(text))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{EmbeddingSpace, MetricSpace};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn opts() -> RequestOptions {
        RequestOptions::default()
    }

    #[test]
    fn ideal_sentences_from_mock() {
        let llm = MockLlm::new(1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = generate_ideal_sentences("global warming", 3, &llm, &opts(), &mut rng).unwrap();
        assert_eq!(s.len(), 3);
        let mut uniq = s.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(s, generate_ideal_sentences("global warming", 3, &llm, &opts(), &mut rng).unwrap());
        let one = generate_ideal_sentences("global warming", 1, &llm, &opts(), &mut rng).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn shortfall_is_re_requested() {
        let llm = ScriptedLlm::new(["1) a\n2) b", "1) c"]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = generate_ideal_sentences("t", 3, &llm, &opts(), &mut rng).unwrap();
        assert_eq!(s, vec!["a", "b", "c"]);
        let prompts = llm.prompts();
        assert_eq!(prompts.len(), 2);
        assert!(prompts[1].contains("Give me 1 different"), "{}", prompts[1]);
    }

    #[test]
    fn persistent_under_delivery_fails() {
        let llm = ScriptedLlm::new(["1) a", "1) b", "1) c", "1) d"]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = generate_ideal_sentences("t", 9, &llm, &opts(), &mut rng).unwrap_err();
        assert!(matches!(
            err,
            Error::Provider { source: ProviderError::UnderDelivery { wanted: 9, got: 4 }, .. }
        ));
    }

    #[test]
    fn resembling_echo_and_shuffle() {
        let s = "Governments should invest in solar power to cut emissions.";
        let echo = MockLlm::with_style(0, MockStyle::Echo);
        assert_eq!(generate_resembling(s, &echo, &opts(), 9).unwrap(), s);
        let shuffle = MockLlm::with_style(0, MockStyle::Shuffle);
        let out = generate_resembling(s, &shuffle, &opts(), 9).unwrap();
        assert_ne!(out, s);
        let emb = HashEmbedder::new(64, 3);
        let space = EmbeddingSpace::new(64).unwrap();
        let d = space.dist(&embed(s, &emb).unwrap(), &embed(&out, &emb).unwrap()).unwrap();
        assert!(d > 0.0);
    }

    #[test]
    fn empty_reply_exhausts_retries() {
        let llm = ScriptedLlm::new(["", " ", "\n", ""]);
        let err = generate_resembling("x", &llm, &opts(), 0).unwrap_err();
        assert!(matches!(err, Error::Provider { source: ProviderError::EmptyReply, .. }));
        assert_eq!(llm.prompts().len(), 4);
    }

    #[test]
    fn candidates_parsed_and_capped() {
        let llm = ScriptedLlm::new(["1) a\n2) b\n3) c"]);
        let c = generate_candidates("x", "y", TemplateId::Mediator1, 10, "t", &llm, &opts(), 0).unwrap();
        assert_eq!(c, vec!["a", "b", "c"]);
        let llm = ScriptedLlm::new(["1) a\n2) b\n3) c"]);
        let c = generate_candidates("x", "y", TemplateId::Mediator2, 2, "t", &llm, &opts(), 0).unwrap();
        assert_eq!(c, vec!["a", "b"]);
    }

    #[test]
    fn unnumbered_candidates_retry_then_fail() {
        let llm = ScriptedLlm::new(["plain text", "still plain", "1) finally"]);
        let c = generate_candidates("x", "y", TemplateId::Mediator3, 10, "t", &llm, &opts(), 0).unwrap();
        assert_eq!(c, vec!["finally"]);
        let llm = ScriptedLlm::new(["plain"; 4]);
        let err = generate_candidates("x", "y", TemplateId::Mediator1, 10, "t", &llm, &opts(), 0).unwrap_err();
        assert!(matches!(err, Error::Provider { source: ProviderError::NoCandidates, .. }));
    }

    #[test]
    fn non_transient_errors_are_not_retried() {
        let llm = ScriptedLlm::from_outcomes(vec![
            Err(ProviderError::Status { status: 401, body: "no".into() }),
            Ok("1) a".into()),
        ]);
        assert!(generate_candidates("x", "y", TemplateId::Mediator1, 10, "t", &llm, &opts(), 0).is_err());
        assert_eq!(llm.prompts().len(), 1);
        let llm = ScriptedLlm::from_outcomes(vec![
            Err(ProviderError::Status { status: 503, body: "busy".into() }),
            Ok("1) a".into()),
        ]);
        assert_eq!(
            generate_candidates("x", "y", TemplateId::Mediator1, 10, "t", &llm, &opts(), 0).unwrap(),
            vec!["a"]
        );
    }

    #[test]
    fn retry_attempts_shift_the_seed() {
        let llm = ScriptedLlm::new(["", "1) a"]);
        generate_candidates("x", "y", TemplateId::Mediator1, 10, "t", &llm, &opts(), 40).unwrap();
        assert_eq!(llm.seeds(), vec![Some(40), Some(41)]);
    }

    #[test]
    fn embed_checks() {
        let emb = HashEmbedder::new(16, 0);
        let a = embed("plant trees", &emb).unwrap();
        assert_eq!(a, embed("plant trees", &emb).unwrap());
        assert_eq!(a.source_text(), Some("plant trees"));
        assert!(embed("   ", &emb).is_err());
        let short = mock::FixedEmbedder::new(512, vec![1.0; 511]);
        let err = embed("x", &short).unwrap_err();
        assert!(matches!(
            err,
            Error::Provider { source: ProviderError::EmbeddingDimension { expected: 512, found: 511 }, .. }
        ));
    }

    #[test]
    fn temperature_bounds() {
        assert!(RequestOptions { temperature: 2.5, max_retries: 0 }.validate().is_err());
        assert!(RequestOptions::default().validate().is_ok());
    }
}
