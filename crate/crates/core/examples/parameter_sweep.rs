//! A small grid from a JSON batch file, run on a worker pool and written as
//! runs.csv, summary.csv and runs.jsonl.

use coalition_core::harness::batch::{euclid_runner, run_batch, BatchOptions};
use coalition_core::harness::{summarize, write_batch, BatchConfig};

const BATCH: &str = r#"{
    "master_seed": 17,
    "n": [10, 20, 40],
    "alpha": [-1, 0, 1],
    "discipline": ["none", "unanimity"],
    "sigma": 10,
    "repetitions": 10,
    "iteration_cap": 2000
}"#;

fn main() -> coalition_core::Result<()> {
    let batch: BatchConfig = serde_json::from_str(BATCH)?;
    let configs = batch.expand()?;
    let outputs = run_batch(&configs, BatchOptions::default(), euclid_runner)?;
    let records: Vec<_> = outputs.iter().map(|o| o.record.clone()).collect();

    println!("{:>4} {:>5} {:>10} {:>6} {:>10} {:>8}", "n", "alpha", "discipline", "conv", "mean it", "quality");
    for row in summarize(&records) {
        println!(
            "{:>4} {:>5} {:>10} {:>6.2} {:>10.1} {:>8.2}",
            row.n,
            row.alpha,
            row.discipline,
            row.convergence_rate.unwrap_or(f64::NAN),
            row.mean_iterations.unwrap_or(f64::NAN),
            row.mean_quality.unwrap_or(f64::NAN)
        );
    }

    let dir = std::env::temp_dir().join("coalition-parameter-sweep");
    for f in write_batch(&dir, &outputs)?.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
