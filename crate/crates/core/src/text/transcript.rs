//! JSON-lines transcripts of provider traffic, and replay from them.
//!
//! Every completion and embedding call is written as one line, including
//! failed calls, so a replayed run walks the exact same retry path.

use std::collections::{HashMap, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Embedder, LlmProvider, LlmRequest, TemplateId};
use crate::error::{Error, ProviderError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TranscriptEntry {
    Header {
        config: Value,
    },
    Completion {
        template: TemplateId,
        system: String,
        prompt: String,
        seed: Option<u64>,
        temperature: f64,
        outcome: std::result::Result<String, ProviderError>,
        latency_ms: u64,
    },
    Embedding {
        text: String,
        outcome: std::result::Result<Vec<f64>, ProviderError>,
    },
}

/// Thread-safe line writer. Each entry is flushed as soon as it is written.
pub struct TranscriptWriter {
    out: Mutex<Box<dyn Write + Send>>,
}

impl TranscriptWriter {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(Self::from_writer(BufWriter::new(File::create(path)?)))
    }

    pub fn from_writer(w: impl Write + Send + 'static) -> Self {
        TranscriptWriter {
            out: Mutex::new(Box::new(w)),
        }
    }

    pub fn write(&self, entry: &TranscriptEntry) -> Result<()> {
        let line = serde_json::to_string(entry)?;
        let mut out = self.out.lock().unwrap();
        writeln!(out, "{line}")?;
        out.flush()?;
        Ok(())
    }

    fn record(&self, entry: TranscriptEntry) {
        if let Err(e) = self.write(&entry) {
            log::error!("failed to write transcript entry: {e}");
        }
    }
}

pub fn read_transcript(path: &Path) -> Result<Vec<TranscriptEntry>> {
    let reader = BufReader::new(File::open(path)?);
    let mut entries = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(&line)
            .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        entries.push(entry);
    }
    Ok(entries)
}

pub struct RecordingLlm<L> {
    inner: L,
    writer: Arc<TranscriptWriter>,
}

impl<L: LlmProvider> RecordingLlm<L> {
    pub fn new(inner: L, writer: Arc<TranscriptWriter>) -> Self {
        RecordingLlm { inner, writer }
    }
}

impl<L: LlmProvider> LlmProvider for RecordingLlm<L> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn complete(&self, request: &LlmRequest) -> std::result::Result<String, ProviderError> {
        let start = Instant::now();
        let outcome = self.inner.complete(request);
        self.writer.record(TranscriptEntry::Completion {
            template: request.template,
            system: request.system_message.clone(),
            prompt: request.user_prompt.clone(),
            seed: request.seed,
            temperature: request.temperature,
            outcome: outcome.clone(),
            latency_ms: start.elapsed().as_millis() as u64,
        });
        outcome
    }

    fn backoff(&self, attempt: u32) -> std::time::Duration {
        self.inner.backoff(attempt)
    }
}

pub struct RecordingEmbedder<E> {
    inner: E,
    writer: Arc<TranscriptWriter>,
}

impl<E: Embedder> RecordingEmbedder<E> {
    pub fn new(inner: E, writer: Arc<TranscriptWriter>) -> Self {
        RecordingEmbedder { inner, writer }
    }
}

impl<E: Embedder> Embedder for RecordingEmbedder<E> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn embed_raw(&self, text: &str) -> std::result::Result<Vec<f64>, ProviderError> {
        let outcome = self.inner.embed_raw(text);
        self.writer.record(TranscriptEntry::Embedding {
            text: text.to_string(),
            outcome: outcome.clone(),
        });
        outcome
    }
}

type CompletionKey = (TemplateId, String, String, Option<u64>);

/// Serves recorded outcomes as both chat model and embedder.
///
/// Completions are matched on template, system message, prompt and seed;
/// repeated identical requests consume their recorded outcomes in order.
/// Embeddings are matched on text, and the last recorded vector is reused
/// once the queue for a text runs dry.
#[derive(Debug)]
pub struct ReplayProvider {
    header: Option<Value>,
    dimension: usize,
    completions: Mutex<HashMap<CompletionKey, VecDeque<std::result::Result<String, ProviderError>>>>,
    embeddings: Mutex<HashMap<String, VecDeque<std::result::Result<Vec<f64>, ProviderError>>>>,
}

impl ReplayProvider {
    pub fn open(path: &Path) -> Result<Self> {
        Self::from_entries(read_transcript(path)?)
    }

    pub fn from_entries(entries: Vec<TranscriptEntry>) -> Result<Self> {
        let mut header = None;
        let mut dimension = None;
        let mut completions: HashMap<CompletionKey, VecDeque<_>> = HashMap::new();
        let mut embeddings: HashMap<String, VecDeque<_>> = HashMap::new();
        for entry in entries {
            match entry {
                TranscriptEntry::Header { config } => {
                    if header.is_none() {
                        header = Some(config);
                    }
                }
                TranscriptEntry::Completion {
                    template,
                    system,
                    prompt,
                    seed,
                    outcome,
                    ..
                } => completions
                    .entry((template, system, prompt, seed))
                    .or_default()
                    .push_back(outcome),
                TranscriptEntry::Embedding { text, outcome } => {
                    if let (None, Ok(v)) = (dimension, &outcome) {
                        dimension = Some(v.len());
                    }
                    embeddings.entry(text).or_default().push_back(outcome);
                }
            }
        }
        let from_header = header
            .as_ref()
            .and_then(|h| h.get("embed_dimension"))
            .and_then(Value::as_u64)
            .map(|d| d as usize);
        Ok(ReplayProvider {
            dimension: from_header.or(dimension).unwrap_or(crate::metric::DEFAULT_EMBED_DIM),
            header,
            completions: Mutex::new(completions),
            embeddings: Mutex::new(embeddings),
        })
    }

    /// Configuration recorded by the run that wrote the transcript.
    pub fn header(&self) -> Option<&Value> {
        self.header.as_ref()
    }

    pub fn remaining_completions(&self) -> usize {
        self.completions.lock().unwrap().values().map(VecDeque::len).sum()
    }
}

impl LlmProvider for ReplayProvider {
    fn name(&self) -> &str {
        "replay"
    }

    fn complete(&self, request: &LlmRequest) -> std::result::Result<String, ProviderError> {
        let key = (
            request.template,
            request.system_message.clone(),
            request.user_prompt.clone(),
            request.seed,
        );
        let mut map = self.completions.lock().unwrap();
        map.get_mut(&key).and_then(VecDeque::pop_front).unwrap_or_else(|| {
            Err(ProviderError::ReplayMiss(format!(
                "{} completion with seed {:?}",
                request.template, request.seed
            )))
        })
    }
}

impl Embedder for ReplayProvider {
    fn name(&self) -> &str {
        "replay"
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_raw(&self, text: &str) -> std::result::Result<Vec<f64>, ProviderError> {
        let mut map = self.embeddings.lock().unwrap();
        let queue = map
            .get_mut(text)
            .ok_or_else(|| ProviderError::ReplayMiss(format!("embedding of {text:?}")))?;
        if queue.len() > 1 {
            queue.pop_front().unwrap()
        } else {
            queue.front().cloned().unwrap()
        }
    }
}
