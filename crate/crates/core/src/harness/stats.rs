//! Summary statistics and the paired Wilcoxon signed-rank test.

use serde::{Deserialize, Serialize};

use crate::acquisition::normal_cdf;
use crate::error::{Error, Result};

/// Significance level for verdicts.
pub const ALPHA: f64 = 0.05;
/// Largest effective sample size handled by the exact null distribution.
pub const EXACT_MAX: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Better,
    Worse,
    Similar,
}

impl Verdict {
    /// Table symbol, read as "the first sample is ... than the second".
    pub fn symbol(self) -> &'static str {
        match self {
            Verdict::Better => "+",
            Verdict::Worse => "-",
            Verdict::Similar => "≈",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMethod {
    Exact,
    Normal,
    NoDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// `min(W⁺, W⁻)`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_value: f64,
    /// Verdict for the first sample under minimization.
    pub verdict: Verdict,
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
    pub method: PMethod,
}

/// Mid-ranks of `values` (1-based), ties sharing the average rank.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Two-sided Wilcoxon signed-rank test on paired samples `a`, `b`.
///
/// Zero differences are dropped; if nothing is left the result is
/// `p = 1`, `similar`. Exact null distribution for up to [`EXACT_MAX`]
/// effective pairs, otherwise the normal approximation with tie and
/// continuity corrections. `better` means `a` is significantly smaller.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::invalid("paired samples differ in length"));
    }
    if a.is_empty() {
        return Err(Error::invalid("paired samples are empty"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("paired samples must be finite"));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let m = diffs.len();
    if m == 0 {
        return Ok(TestResult {
            statistic: 0.0,
            w_plus: 0.0,
            w_minus: 0.0,
            p_value: 1.0,
            verdict: Verdict::Similar,
            n_effective: 0,
            method: PMethod::NoDifference,
        });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = mid_ranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total = (m * (m + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let statistic = w_plus.min(w_minus);

    let (p_value, method) = if m <= EXACT_MAX {
        (exact_p(&ranks, w_plus), PMethod::Exact)
    } else {
        (normal_p(&abs, &ranks, w_plus), PMethod::Normal)
    };
    let p_value = p_value.clamp(0.0, 1.0);

    let mut sorted = diffs.clone();
    sorted.sort_by(f64::total_cmp);
    let med = median(&sorted);
    let direction = if med != 0.0 { med } else { w_plus - w_minus };
    let verdict = if p_value >= ALPHA || direction == 0.0 {
        Verdict::Similar
    } else if direction < 0.0 {
        Verdict::Better
    } else {
        Verdict::Worse
    };
    Ok(TestResult {
        statistic,
        w_plus,
        w_minus,
        p_value,
        verdict,
        n_effective: m,
        method,
    })
}

/// Exact two-sided p: the null probability that `min(W⁺, W⁻)` is at most
/// the observed value, from the distribution of `2W⁺` built by dynamic
/// programming over the (doubled, hence integral) mid-ranks.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let wp = (2.0 * w_plus).round() as usize;
    let w = wp.min(total - wp);
    let hits: u64 = counts
        .iter()
        .enumerate()
        .filter(|&(s, _)| s <= w || s >= total - w)
        .map(|(_, c)| c)
        .sum();
    hits as f64 / 2f64.powi(ranks.len() as i32)
}

fn normal_p(abs: &[f64], ranks: &[f64], w_plus: f64) -> f64 {
    let m = ranks.len() as f64;
    let mean = m * (m + 1.0) / 4.0;
    let mut sorted = abs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = m * (m + 1.0) * (2.0 * m + 1.0) / 24.0 - tie_term / 48.0;
    if !(var > 0.0) {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    2.0 * (1.0 - normal_cdf(z))
}

/// Per-algorithm statistics of the final best value over runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub runs: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (`n - 1`); 0 for a single run.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// Evaluation-aligned mean of the best-so-far curves.
    pub mean_curve: Vec<f64>,
}

/// Statistics over best-so-far curves sharing one length.
pub fn summarize<C: AsRef<[f64]>>(curves: &[C]) -> Result<SummaryStats> {
    let first = curves
        .first()
        .ok_or_else(|| Error::invalid("no runs to summarize"))?;
    let len = first.as_ref().len();
    if len == 0 {
        return Err(Error::invalid("runs have no evaluations"));
    }
    if curves.iter().any(|c| c.as_ref().len() != len) {
        return Err(Error::invalid("runs differ in evaluation count"));
    }
    let k = curves.len() as f64;
    let finals: Vec<f64> = curves.iter().map(|c| c.as_ref()[len - 1]).collect();
    let mean_curve: Vec<f64> = (0..len)
        .map(|i| curves.iter().map(|c| c.as_ref()[i]).sum::<f64>() / k)
        .collect();
    let mean = mean_curve[len - 1];
    let std = if curves.len() > 1 {
        (finals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = finals.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(SummaryStats {
        runs: curves.len(),
        mean,
        median: median(&sorted),
        std,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        mean_curve,
    })
}
