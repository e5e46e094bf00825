//! Text runs against the offline mock chat model and hash embedder, one per
//! mediator option, showing the sentence each process settles on.

use std::sync::Arc;

use coalition_core::harness::batch::{derive_seed, run_text, TextProviders};
use coalition_core::harness::RunConfig;
use coalition_core::metric::DEFAULT_EMBED_DIM;
use coalition_core::text::{HashEmbedder, MockLlm};
use coalition_core::MediatorOption;

fn main() -> coalition_core::Result<()> {
    let providers = TextProviders {
        llm: Arc::new(MockLlm::new(0)),
        embedder: Arc::new(HashEmbedder::new(DEFAULT_EMBED_DIM, 0)),
    };
    for option in MediatorOption::ALL {
        let mut config = RunConfig::text(10, DEFAULT_EMBED_DIM, "global warming", option);
        config.noise_init = true;
        config.iteration_cap = 500;
        let run = run_text(&config, derive_seed(5, 0, 0), &providers, false)?;
        let res = &run.result;
        println!("option {option}: {} after {} iterations", res.status, res.iterations);
        if let Some(w) = &res.winning_coalition {
            println!(
                "    {} agents agree on \"{}\" (mean distance {:.3})",
                w.size(),
                w.point.source_text().unwrap_or("<unnamed point>"),
                res.quality.unwrap()
            );
        }
    }
    Ok(())
}
