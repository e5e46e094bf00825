//! Result files and the statistics derived from them.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::batch::{RunOutput, RunRecord};
use crate::error::{Error, Result};
use crate::stats::{anova_oneway, mean, pairwise_compare, std_dev, AnovaResult, PairwiseRow};

pub const RUNS_CSV: &str = "runs.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const RUNS_JSONL: &str = "runs.jsonl";
pub const ITERATIONS_CSV: &str = "iterations.csv";
pub const PROJECTION_CSV: &str = "projection.csv";
pub const STATS_JSON: &str = "stats.json";

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub config_index: usize,
    pub space: String,
    pub n: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub discipline: String,
    pub noise_init: bool,
    pub halt_quota: f64,
    pub iteration_cap: usize,
    pub gmm_peaks: Option<u8>,
    pub topic: Option<String>,
    pub mediator_option: Option<u8>,
    pub repetitions: usize,
    pub failures: usize,
    pub converged_runs: usize,
    pub convergence_rate: Option<f64>,
    /// Non-converged runs counted at the cap.
    pub mean_iterations: Option<f64>,
    pub std_iterations: Option<f64>,
    /// Converged runs only.
    pub mean_iterations_converged: Option<f64>,
    /// Converged runs only.
    pub mean_quality: Option<f64>,
    pub std_quality: Option<f64>,
}

fn nonempty(xs: &[f64], f: fn(&[f64]) -> f64) -> Option<f64> {
    (!xs.is_empty()).then(|| f(xs))
}

/// Per-configuration summary, computed from run records alone.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.config_index).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(config_index, runs)| {
            let first = runs[0];
            let ok: Vec<&RunRecord> = runs.iter().copied().filter(|r| !r.failed()).collect();
            let converged: Vec<&RunRecord> = ok.iter().copied().filter(|r| r.converged).collect();
            let speed: Vec<f64> = ok.iter().map(|r| r.speed_iterations as f64).collect();
            let conv_iters: Vec<f64> = converged.iter().map(|r| r.iterations as f64).collect();
            let quality: Vec<f64> = converged.iter().filter_map(|r| r.quality).collect();
            SummaryRow {
                config_index,
                space: first.space.clone(),
                n: first.n,
                sigma: first.sigma,
                alpha: first.alpha,
                discipline: first.discipline.clone(),
                noise_init: first.noise_init,
                halt_quota: first.halt_quota,
                iteration_cap: first.iteration_cap,
                gmm_peaks: first.gmm_peaks,
                topic: first.topic.clone(),
                mediator_option: first.mediator_option,
                repetitions: runs.len(),
                failures: runs.len() - ok.len(),
                converged_runs: converged.len(),
                convergence_rate: (!ok.is_empty()).then(|| converged.len() as f64 / ok.len() as f64),
                mean_iterations: nonempty(&speed, mean),
                std_iterations: nonempty(&speed, std_dev),
                mean_iterations_converged: nonempty(&conv_iters, mean),
                mean_quality: nonempty(&quality, mean),
                std_quality: nonempty(&quality, std_dev),
            }
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Paths written by [`write_batch`].
#[derive(Debug, Clone, Default)]
pub struct WrittenFiles {
    pub files: Vec<PathBuf>,
}

/// Writes `runs.csv`, `summary.csv` and `runs.jsonl`, plus `iterations.csv`
/// when traces were kept and `projection.csv` for text runs.
pub fn write_batch(dir: &Path, outputs: &[RunOutput]) -> Result<WrittenFiles> {
    std::fs::create_dir_all(dir)?;
    let mut written = WrittenFiles::default();
    let records: Vec<RunRecord> = outputs.iter().map(|o| o.record.clone()).collect();
    let path = dir.join(RUNS_CSV);
    write_csv(&path, &records)?;
    written.files.push(path);
    let path = dir.join(SUMMARY_CSV);
    write_csv(&path, &summarize(&records))?;
    written.files.push(path);

    let path = dir.join(RUNS_JSONL);
    let mut w = BufWriter::new(File::create(&path)?);
    for o in outputs {
        let line = serde_json::json!({"record": o.record, "result": o.result});
        writeln!(w, "{}", serde_json::to_string(&line)?)?;
    }
    w.flush()?;
    written.files.push(path);

    let iterations: Vec<_> = outputs.iter().flat_map(|o| o.iterations.iter().cloned()).collect();
    if !iterations.is_empty() {
        let path = dir.join(ITERATIONS_CSV);
        write_csv(&path, &iterations)?;
        written.files.push(path);
    }
    let projection: Vec<_> = outputs.iter().flat_map(|o| o.projection.iter().cloned()).collect();
    if !projection.is_empty() {
        let path = dir.join(PROJECTION_CSV);
        write_csv(&path, &projection)?;
        written.files.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStats {
    pub key: String,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseEntry {
    pub a: String,
    pub b: String,
    #[serde(flatten)]
    pub row: PairwiseRow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub group_by: String,
    pub metric: String,
    pub groups: Vec<GroupStats>,
    pub anova: Option<AnovaResult>,
    pub pairwise: Vec<PairwiseEntry>,
    pub posthoc_method: &'static str,
    pub alpha_level: f64,
    /// Set when the groups are too small for the tests.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn sort_keys(keys: &mut [String]) {
    keys.sort_by(|a, b| match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y),
        _ => a.cmp(b),
    });
}

/// Groups a `runs.csv`-shaped table by `group_by` and tests `metric` across
/// groups. Failed runs and empty metric cells are skipped.
pub fn analyze_table(
    headers: &[String],
    rows: &[Vec<String>],
    group_by: &str,
    metric: &str,
    alpha_level: f64,
) -> Result<StatsReport> {
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("no column `{name}` in input")))
    };
    let (g, m) = (col(group_by)?, col(metric)?);
    let err = headers.iter().position(|h| h == "error");
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in rows {
        if err.is_some_and(|e| row.get(e).is_some_and(|v| !v.is_empty())) {
            continue;
        }
        let raw = row.get(m).map(String::as_str).unwrap_or("");
        if raw.is_empty() {
            continue;
        }
        let v: f64 = match raw {
            "true" => 1.0,
            "false" => 0.0,
            _ => raw
                .parse()
                .map_err(|_| Error::Config(format!("non-numeric `{metric}` value `{raw}`")))?,
        };
        groups.entry(row.get(g).cloned().unwrap_or_default()).or_default().push(v);
    }
    let mut keys: Vec<String> = groups.keys().cloned().collect();
    sort_keys(&mut keys);
    let samples: Vec<Vec<f64>> = keys.iter().map(|k| groups[k].clone()).collect();
    let stats = keys
        .iter()
        .zip(&samples)
        .map(|(k, s)| GroupStats {
            key: k.clone(),
            count: s.len(),
            mean: mean(s),
            std: std_dev(s),
        })
        .collect();
    let mut report = StatsReport {
        group_by: group_by.to_string(),
        metric: metric.to_string(),
        groups: stats,
        anova: None,
        pairwise: Vec::new(),
        posthoc_method: "bonferroni_welch",
        alpha_level,
        note: None,
    };
    match (anova_oneway(&samples), pairwise_compare(&samples, alpha_level)) {
        (Ok(a), Ok(p)) => {
            report.anova = Some(a);
            report.pairwise = p
                .into_iter()
                .map(|row| PairwiseEntry {
                    a: keys[row.a].clone(),
                    b: keys[row.b].clone(),
                    row,
                })
                .collect();
        }
        (Err(e), _) | (_, Err(e)) => report.note = Some(e.to_string()),
    }
    Ok(report)
}

pub fn analyze_csv(path: &Path, group_by: &str, metric: &str, alpha_level: f64) -> Result<StatsReport> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
    analyze_table(&headers, &rows, group_by, metric, alpha_level)
}

pub fn analyze_records(records: &[RunRecord], group_by: &str, metric: &str, alpha_level: f64) -> Result<StatsReport> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
    analyze_table(&headers, &rows, group_by, metric, alpha_level)
}

pub fn write_stats(path: &Path, report: &StatsReport) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::batch::{euclid_runner, run_batch, BatchOptions};
    use crate::harness::config::RunConfig;

    #[test]
    fn summary_is_a_fold_over_persisted_rows() {
        let mut a = RunConfig::euclid(6);
        a.repetitions = 4;
        let mut b = RunConfig::euclid(6);
        b.discipline = crate::engine::DisciplinePolicy::Unanimity;
        b.iteration_cap = 30;
        b.repetitions = 4;
        let out = run_batch(&[a, b], BatchOptions { workers: 2, traces: true }, euclid_runner).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_batch(dir.path(), &out).unwrap();
        let back = read_runs_csv(&dir.path().join(RUNS_CSV)).unwrap();
        let records: Vec<_> = out.iter().map(|o| o.record.clone()).collect();
        assert_eq!(back, records);
        let mut r = csv::Reader::from_path(dir.path().join(SUMMARY_CSV)).unwrap();
        let persisted: Vec<SummaryRow> = r.deserialize().map(|x| x.unwrap()).collect();
        assert_eq!(persisted, summarize(&back));
        assert!(persisted.iter().all(|s| s.convergence_rate.is_some_and(|c| (0.0..=1.0).contains(&c))));
        assert!(dir.path().join(ITERATIONS_CSV).exists());
    }

    #[test]
    fn analysis_groups_and_skips() {
        let headers: Vec<String> = ["opt", "iterations", "error"].iter().map(|s| s.to_string()).collect();
        let data = [
            ("1", "2.1"), ("1", "3.4"), ("1", "1.9"), ("1", "2.8"), ("1", "3.0"),
            ("4", "4.2"), ("4", "3.9"), ("4", "5.1"), ("4", "4.6"),
            ("5", "3.3"), ("5", "2.7"), ("5", "3.8"), ("5", "3.1"), ("5", "2.9"), ("5", "3.6"),
        ];
        let mut rows: Vec<Vec<String>> =
            data.iter().map(|(g, v)| vec![g.to_string(), v.to_string(), String::new()]).collect();
        rows.push(vec!["5".into(), "999".into(), "boom".into()]);
        rows.push(vec!["5".into(), String::new(), String::new()]);
        let rep = analyze_table(&headers, &rows, "opt", "iterations", 0.05).unwrap();
        assert_eq!(rep.groups.iter().map(|g| g.count).collect::<Vec<_>>(), vec![5, 4, 6]);
        let f = rep.anova.unwrap().f;
        assert!(((f - 13.714110178169143) / f).abs() < 1e-9);
        assert_eq!(rep.pairwise.len(), 3);
        assert_eq!((rep.pairwise[0].a.as_str(), rep.pairwise[0].b.as_str()), ("1", "4"));
        assert!(analyze_table(&headers, &rows, "nope", "iterations", 0.05).is_err());
    }

    #[test]
    fn numeric_keys_sort_numerically() {
        let mut k = vec!["10".to_string(), "9".into(), "100".into()];
        sort_keys(&mut k);
        assert_eq!(k, vec!["9", "10", "100"]);
    }
}
