//! Multi-seed experiment campaigns.
//!
//! A campaign runs every algorithm `runs` times on one problem. Within a run
//! index all algorithms share the initial design; each algorithm gets its own
//! stream for everything else. Each `(algorithm, run)` job writes one CSV and
//! the campaign writes `summary.json` once all jobs finish.

pub mod io;
pub mod stats;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{Problem, ProblemId};
use crate::engine::{run, Algorithm, BoConfig, RunRecord, RunStatus};
use crate::error::{Error, Result};
use crate::rng::{mix_seed, tags};

pub use io::{csv_file_name, read_csv_dir, CsvRun};
pub use stats::{summarize, wilcoxon_signed_rank, SummaryStats, TestResult, Verdict};

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemId,
    pub dim: usize,
    pub algorithms: Vec<Algorithm>,
    pub n_init: usize,
    pub n_max: usize,
    pub runs: usize,
    pub seed: u64,
    pub out: PathBuf,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

fn default_threads() -> usize {
    1
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::invalid("runs must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::invalid("at least one algorithm is required"));
        }
        Problem::new(self.problem, self.dim)?;
        self.bo_config(Algorithm::StandardBo, 0).validate()
    }

    /// Seed of the initial design shared by all algorithms in run `run`.
    pub fn doe_seed(&self, run: usize) -> u64 {
        mix_seed(&[self.seed, run as u64, tags::DOE])
    }

    /// Driver settings for `(algorithm, run)`.
    pub fn bo_config(&self, algorithm: Algorithm, run: usize) -> BoConfig {
        BoConfig::new(
            self.dim,
            self.n_init,
            self.n_max,
            mix_seed(&[self.seed, run as u64, algorithm.seed_tag()]),
        )
        .with_doe_seed(self.doe_seed(run))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub run: usize,
    pub status: RunStatus,
    pub evaluations: usize,
    /// Acquisition-function evaluations spent by the inner optimizer.
    pub acquisition_evaluations: u64,
    pub final_best: Option<f64>,
    /// Evaluation indices whose proposed infill was a duplicate and got replaced.
    pub fallbacks: Vec<usize>,
    pub wall_time_secs: f64,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub algorithm: Algorithm,
    pub other: Algorithm,
    pub pairs: usize,
    pub result: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub software_version: String,
    pub config: ExperimentConfig,
    pub runs: Vec<RunSummary>,
    pub stats: BTreeMap<Algorithm, SummaryStats>,
    pub comparisons: Vec<Comparison>,
    pub wall_time_secs: f64,
}

/// Run a campaign and persist its CSVs and summary under `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let started = Instant::now();
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let jobs: Vec<(usize, Algorithm)> = (0..cfg.runs)
        .flat_map(|r| cfg.algorithms.iter().map(move |&a| (r, a)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let records: Vec<(usize, RunRecord)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(r, algo)| {
                let problem = Problem::new(cfg.problem, cfg.dim)?;
                let record = run(algo, &problem, &cfg.bo_config(algo, r))?;
                let path = cfg.out.join(csv_file_name(algo, r));
                CsvRun::from_record(r, &record).write(&path, cfg.dim)?;
                Ok((r, record))
            })
            .collect::<Result<_>>()
    })?;

    let runs = records
        .iter()
        .map(|(r, rec)| RunSummary {
            algorithm: rec.algorithm,
            run: *r,
            status: rec.status.clone(),
            evaluations: rec.entries.len(),
            acquisition_evaluations: rec.acquisition_evaluations,
            final_best: rec.final_best(),
            fallbacks: rec
                .infills
                .iter()
                .filter(|i| i.fallback)
                .map(|i| i.eval)
                .collect(),
            wall_time_secs: rec.wall_time_secs,
            csv: csv_file_name(rec.algorithm, *r),
        })
        .collect();
    let traces: Vec<CsvRun> = records
        .iter()
        .filter(|(_, rec)| rec.is_completed())
        .map(|(r, rec)| CsvRun::from_record(*r, rec))
        .collect();
    let stats = stats_by_algorithm(&traces, cfg.n_max)?;
    let comparisons = pairwise_comparisons(&cfg.algorithms, &traces, cfg.n_max)?;
    let summary = ExperimentSummary {
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        runs,
        stats,
        comparisons,
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    io::write_json(&cfg.out.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

fn complete(traces: &[CsvRun], algo: Algorithm, n_max: usize) -> BTreeMap<usize, &CsvRun> {
    traces
        .iter()
        .filter(|t| t.algorithm == algo && t.entries.len() == n_max)
        .map(|t| (t.run, t))
        .collect()
}

/// Statistics per algorithm over runs with exactly `n_max` evaluations.
pub fn stats_by_algorithm(
    traces: &[CsvRun],
    n_max: usize,
) -> Result<BTreeMap<Algorithm, SummaryStats>> {
    let mut algos: Vec<Algorithm> = traces.iter().map(|t| t.algorithm).collect();
    algos.sort();
    algos.dedup();
    let mut out = BTreeMap::new();
    for algo in algos {
        let curves: Vec<Vec<f64>> = complete(traces, algo, n_max)
            .values()
            .map(|t| t.best_curve())
            .collect();
        if !curves.is_empty() {
            out.insert(algo, summarize(&curves)?);
        }
    }
    Ok(out)
}

/// Paired final-best values of `a` and `b` over run indices both completed.
pub fn paired_finals(
    traces: &[CsvRun],
    a: Algorithm,
    b: Algorithm,
    n_max: usize,
) -> (Vec<f64>, Vec<f64>) {
    let ta = complete(traces, a, n_max);
    let tb = complete(traces, b, n_max);
    ta.iter()
        .filter_map(|(r, ra)| {
            tb.get(r)
                .and_then(|rb| Some((ra.final_best()?, rb.final_best()?)))
        })
        .unzip()
}

fn pairwise_comparisons(
    algos: &[Algorithm],
    traces: &[CsvRun],
    n_max: usize,
) -> Result<Vec<Comparison>> {
    let mut out = Vec::new();
    for (i, &a) in algos.iter().enumerate() {
        for &b in &algos[i + 1..] {
            let (fa, fb) = paired_finals(traces, a, b, n_max);
            if fa.is_empty() {
                continue;
            }
            out.push(Comparison {
                algorithm: a,
                other: b,
                pairs: fa.len(),
                result: wilcoxon_signed_rank(&fa, &fb)?,
            });
        }
    }
    Ok(out)
}

fn longest_run(traces: &[CsvRun]) -> usize {
    traces.iter().map(|t| t.entries.len()).max().unwrap_or(0)
}

/// Recompute per-algorithm statistics from the CSVs in `dir`. Runs shorter
/// than the longest run (aborted runs) are left out.
pub fn summarize_dir(dir: &Path) -> Result<BTreeMap<Algorithm, SummaryStats>> {
    let traces = read_csv_dir(dir)?;
    if traces.is_empty() {
        return Err(Error::invalid(format!("no CSV files in {}", dir.display())));
    }
    stats_by_algorithm(&traces, longest_run(&traces))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub mean: f64,
    pub median: f64,
    /// `baseline` tested against this algorithm; `None` for the baseline row.
    pub test: Option<TestResult>,
}

/// Wilcoxon table of every algorithm in `dir` against `baseline`. A `+`
/// verdict means the baseline is significantly better than that algorithm.
pub fn compare_dir(dir: &Path, baseline: Algorithm) -> Result<Vec<CompareRow>> {
    let traces = read_csv_dir(dir)?;
    let n_max = longest_run(&traces);
    let stats = stats_by_algorithm(&traces, n_max)?;
    if !stats.contains_key(&baseline) {
        return Err(Error::invalid(format!(
            "no complete runs of baseline '{baseline}' in {}",
            dir.display()
        )));
    }
    stats
        .iter()
        .map(|(&algo, s)| {
            let test = if algo == baseline {
                None
            } else {
                let (fb, fa) = paired_finals(&traces, baseline, algo, n_max);
                if fb.is_empty() {
                    None
                } else {
                    Some(wilcoxon_signed_rank(&fb, &fa)?)
                }
            };
            Ok(CompareRow {
                algorithm: algo,
                runs: s.runs,
                mean: s.mean,
                median: s.median,
                test,
            })
        })
        .collect()
}

/// Plain-text rendering of [`compare_dir`] output.
pub fn render_compare_table(rows: &[CompareRow], baseline: Algorithm) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<20} {:>5} {:>12} {:>12} {:>10} {:>8}",
        "algorithm", "runs", "mean", "median", "p", "verdict"
    );
    let (mut plus, mut approx, mut minus) = (0, 0, 0);
    for row in rows {
        let (p, sym) = match &row.test {
            Some(t) => {
                match t.verdict {
                    Verdict::Better => plus += 1,
                    Verdict::Similar => approx += 1,
                    Verdict::Worse => minus += 1,
                }
                (format!("{:.3e}", t.p_value), t.verdict.symbol())
            }
            None if row.algorithm == baseline => ("-".into(), "N.A."),
            None => ("-".into(), "?"),
        };
        let _ = writeln!(
            s,
            "{:<20} {:>5} {:>12.4e} {:>12.4e} {:>10} {:>8}",
            row.algorithm.as_str(),
            row.runs,
            row.mean,
            row.median,
            p,
            sym
        );
    }
    let _ = writeln!(s, "+/≈/- (baseline {baseline}): {plus}/{approx}/{minus}");
    s
}
