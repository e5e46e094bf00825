//! No discipline, majority quota and unanimity on the same seeded
//! instances: convergence, speed and winner cohesion.

use coalition_core::harness::batch::{euclid_runner, run_batch, BatchOptions};
use coalition_core::harness::{summarize, RunConfig};
use coalition_core::DisciplinePolicy;

fn main() -> coalition_core::Result<()> {
    let configs: Vec<RunConfig> = [DisciplinePolicy::None, DisciplinePolicy::Quota(0.5), DisciplinePolicy::Unanimity]
        .into_iter()
        .flat_map(|d| {
            [0.0, 10.0].map(|sigma| {
                let mut c = RunConfig::euclid(30);
                c.discipline = d;
                c.sigma = sigma;
                c.repetitions = 40;
                c.iteration_cap = 3000;
                c.seed = 12;
                c
            })
        })
        .collect();
    let outputs = run_batch(&configs, BatchOptions::default(), euclid_runner)?;
    let records: Vec<_> = outputs.into_iter().map(|o| o.record).collect();
    for row in summarize(&records) {
        println!(
            "{:>10} sigma {:>4}: {:>2}/{} converged, mean iterations {:>7.1}, mean distance {:.2}",
            row.discipline,
            row.sigma,
            row.converged_runs,
            row.repetitions,
            row.mean_iterations.unwrap_or(f64::NAN),
            row.mean_quality.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
