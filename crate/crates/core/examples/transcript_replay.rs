//! Record every provider call of a text run, then reproduce the run from the
//! transcript alone.

use std::sync::Arc;

use coalition_core::harness::batch::{derive_seed, run_text, TextProviders};
use coalition_core::harness::RunConfig;
use coalition_core::text::transcript::{read_transcript, RecordingEmbedder, RecordingLlm, ReplayProvider, TranscriptWriter};
use coalition_core::text::{HashEmbedder, MockLlm};
use coalition_core::MediatorOption;

fn main() -> coalition_core::Result<()> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("transcript.jsonl");
    let mut config = RunConfig::text(8, 128, "public transport", MediatorOption::BestOfPersona);
    config.noise_init = true;
    let seed = derive_seed(1, 0, 0);

    let writer = Arc::new(TranscriptWriter::create(&path)?);
    let recording = TextProviders {
        llm: Arc::new(RecordingLlm::new(MockLlm::new(0), writer.clone())),
        embedder: Arc::new(RecordingEmbedder::new(HashEmbedder::new(128, 0), writer)),
    };
    let original = run_text(&config, seed, &recording, true)?.result;
    println!(
        "recorded {} provider calls; run {} after {} iterations",
        read_transcript(&path)?.len(),
        original.status,
        original.iterations
    );

    let replay = Arc::new(ReplayProvider::open(&path)?);
    let replayed = run_text(&config, seed, &TextProviders { llm: replay.clone(), embedder: replay.clone() }, true)?.result;
    println!("replayed run identical: {}", replayed == original);
    println!("unused recorded completions: {}", replay.remaining_completions());
    Ok(())
}
