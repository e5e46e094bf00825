//! One seeded run in the plane, printed iteration by iteration.

use coalition_core::harness::batch::{derive_seed, run_euclid};
use coalition_core::harness::RunConfig;
use coalition_core::DisciplinePolicy;

fn main() -> coalition_core::Result<()> {
    let mut config = RunConfig::euclid(25);
    config.sigma = 10.0;
    config.alpha = 0.5;
    config.discipline = DisciplinePolicy::Quota(0.5);
    config.noise_init = true;
    config.gmm_peaks = Some(2);
    config.seed = 42;
    config.validate()?;

    let res = run_euclid(&config, derive_seed(config.seed, 0, 0), true)?;
    for it in res.trace.iter().take(15) {
        println!(
            "{:>3}: pair {:?} -> ({:6.1}, {:6.1}), {} moved, {} coalitions",
            it.iteration,
            it.pair,
            it.proposal.x,
            it.proposal.y,
            it.accepted,
            it.sizes.len()
        );
    }
    if res.trace.len() > 15 {
        println!("... {} more iterations", res.trace.len() - 15);
    }
    println!("status: {}, iterations: {}", res.status, res.iterations);
    if let Some(w) = &res.winning_coalition {
        println!(
            "winner: {} agents at ({:.1}, {:.1}), mean distance to members {:.2}",
            w.size(),
            w.point.x,
            w.point.y,
            res.quality.unwrap()
        );
    }
    Ok(())
}
