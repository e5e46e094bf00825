//! Does alpha change the mean distance inside the winning coalition? One-way
//! ANOVA over three alpha levels, then Bonferroni-corrected Welch pairs.

use coalition_core::harness::batch::{euclid_runner, run_batch, BatchOptions};
use coalition_core::harness::output::analyze_records;
use coalition_core::harness::RunConfig;
use coalition_core::stats::{welch_t_test, Alternative};

fn main() -> coalition_core::Result<()> {
    let configs: Vec<RunConfig> = [-1.0, 0.0, 1.0]
        .iter()
        .map(|&alpha| {
            let mut c = RunConfig::euclid(50);
            c.alpha = alpha;
            c.repetitions = 60;
            c.seed = 8;
            c
        })
        .collect();
    let outputs = run_batch(&configs, BatchOptions::default(), euclid_runner)?;
    let records: Vec<_> = outputs.into_iter().map(|o| o.record).collect();

    let report = analyze_records(&records, "alpha", "quality", 0.05)?;
    for g in &report.groups {
        println!("alpha {:>3}: n = {:>3}, mean {:.3}, sd {:.3}", g.key, g.count, g.mean, g.std);
    }
    if let Some(a) = &report.anova {
        println!("ANOVA F({}, {}) = {:.3}, p = {:.3e}", a.df_between, a.df_within, a.f, a.p);
    }
    for p in &report.pairwise {
        println!(
            "  {} vs {}: diff {:+.3}, corrected p {:.3e}{}",
            p.a,
            p.b,
            p.row.mean_difference,
            p.row.corrected_p,
            if p.row.significant { " *" } else { "" }
        );
    }

    let quality = |alpha: f64| -> Vec<f64> {
        records.iter().filter(|r| r.alpha == alpha).filter_map(|r| r.quality).collect()
    };
    let w = welch_t_test(&quality(1.0), &quality(-1.0), Alternative::Greater)?;
    println!("one-sided Welch, alpha 1 > alpha -1: t = {:.3}, df = {:.1}, p = {:.3e}", w.t, w.df, w.p);
    Ok(())
}
