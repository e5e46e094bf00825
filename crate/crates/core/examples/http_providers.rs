//! A text run against real endpoints. Configure with
//!
//! ```text
//! MEDIATOR_LLM_ENDPOINT=https://api.openai.com/v1/chat/completions
//! MEDIATOR_LLM_API_KEY=...
//! MEDIATOR_EMBED_ENDPOINT=http://localhost:8501/embed
//! MEDIATOR_EMBED_DIM=512
//! ```
//!
//! and optionally `MEDIATOR_LLM_MODEL` / `MEDIATOR_EMBED_MODEL`. Every call
//! is written to `http_transcript.jsonl` so the run can be replayed offline.

use std::path::Path;
use std::sync::Arc;

use coalition_core::harness::batch::{derive_seed, run_text, TextProviders};
use coalition_core::harness::RunConfig;
use coalition_core::text::transcript::{RecordingEmbedder, RecordingLlm, TranscriptEntry, TranscriptWriter};
use coalition_core::text::{CachedEmbedder, HttpConfig, HttpEmbedder, HttpLlm};
use coalition_core::{Error, MediatorOption};

fn main() -> coalition_core::Result<()> {
    let config = match HttpConfig::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("skipping: {e}");
            return Ok(());
        }
    };
    let dimension = config.embed_dimension;
    let llm = HttpLlm::new(config.clone()).map_err(|e| Error::provider("setup", e))?;
    let embedder = CachedEmbedder::new(HttpEmbedder::new(config).map_err(|e| Error::provider("setup", e))?);

    let mut run = RunConfig::text(6, dimension, "global warming", MediatorOption::BestOfPlain);
    run.iteration_cap = 50;
    let writer = Arc::new(TranscriptWriter::create(Path::new("http_transcript.jsonl"))?);
    writer.write(&TranscriptEntry::Header {
        config: serde_json::json!({"configs": [run.clone()], "traces": false, "embed_dimension": dimension}),
    })?;
    let providers = TextProviders {
        llm: Arc::new(RecordingLlm::new(llm, writer.clone())),
        embedder: Arc::new(RecordingEmbedder::new(embedder, writer)),
    };
    let res = run_text(&run, derive_seed(run.seed, 0, 0), &providers, false)?.result;
    println!("{} after {} iterations", res.status, res.iterations);
    if let Some(w) = &res.winning_coalition {
        println!("agreed text: {}", w.point.source_text().unwrap_or(""));
    }
    Ok(())
}
