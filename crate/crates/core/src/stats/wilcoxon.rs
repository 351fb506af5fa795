use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::StatsError;

pub const DEFAULT_EXACT_CUTOFF: usize = 25;

/// Largest sample for which exact counts fit the integer arithmetic.
const MAX_EXACT_N: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMode {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// Sum of ranks of the positive differences `x - y`.
    pub statistic: f64,
    /// Two-sided p-value.
    pub p: f64,
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
    pub mode: WilcoxonMode,
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped and tied absolute differences share their
/// average rank. Up to `exact_cutoff` remaining pairs the null distribution
/// of the rank sum is counted exactly over all sign assignments; above it a
/// normal approximation with tie and continuity corrections is used.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64], exact_cutoff: usize) -> Result<WilcoxonResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Err(StatsError::AllZeroDifferences);
    }
    let n = diffs.len();
    let doubled = doubled_ranks(&diffs);
    let w2: u64 = diffs
        .iter()
        .zip(&doubled)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();
    let statistic = w2 as f64 / 2.0;

    if n <= exact_cutoff.min(MAX_EXACT_N) {
        return Ok(WilcoxonResult {
            statistic,
            p: exact_signed_rank_p(&doubled, w2),
            n_effective: n,
            mode: WilcoxonMode::Exact,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_groups(&diffs)
        .into_iter()
        .map(|t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let d = statistic - mean;
    let z = (d - 0.5 * d.signum()) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(WilcoxonResult {
        statistic,
        p: (2.0 * normal.sf(z.abs())).min(1.0),
        n_effective: n,
        mode: WilcoxonMode::NormalApproximation,
    })
}

/// Exact two-sided p for an observed doubled rank sum, given the doubled
/// ranks of every non-zero difference.
///
/// Counts sign assignments with sum at most and at least the observed one
/// and returns `min(1, 2 * min(lower, upper) / 2^n)`.
pub fn exact_signed_rank_p(doubled_ranks: &[u64], observed: u64) -> f64 {
    let n = doubled_ranks.len();
    assert!(
        n <= MAX_EXACT_N,
        "exact distribution limited to {MAX_EXACT_N} pairs"
    );
    let total: u64 = doubled_ranks.iter().sum();
    // counts[s] = number of subsets of ranks summing to s
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let observed = (observed as usize).min(total as usize);
    let lower: u64 = counts[..=observed].iter().sum();
    let upper: u64 = counts[observed..].iter().sum();
    let assignments = (1u64 << n) as f64;
    (2.0 * lower.min(upper) as f64 / assignments).min(1.0)
}

/// Twice the average rank of each `|d|`, so tied ranks stay integral.
fn doubled_ranks(diffs: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&a, &b| diffs[a].abs().total_cmp(&diffs[b].abs()));
    let mut ranks = vec![0u64; diffs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && diffs[order[end]].abs() == diffs[order[start]].abs() {
            end += 1;
        }
        // ranks start+1 ..= end, average doubled = start + 1 + end
        let doubled = (start + 1 + end) as u64;
        for &i in &order[start..end] {
            ranks[i] = doubled;
        }
        start = end;
    }
    ranks
}

fn tie_groups(diffs: &[f64]) -> Vec<usize> {
    let mut abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < abs.len() {
        let mut j = i + 1;
        while j < abs.len() && abs[j] == abs[i] {
            j += 1;
        }
        if j - i > 1 {
            groups.push(j - i);
        }
        i = j;
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_positive_differences() {
        let res = wilcoxon_signed_rank(&[2.0, 4.0, 7.0], &[1.0, 2.0, 4.0], 25).unwrap();
        assert_eq!(res.statistic, 6.0);
        assert_eq!(res.p, 0.25);
        assert_eq!(res.mode, WilcoxonMode::Exact);
    }

    #[test]
    fn zero_differences_are_dropped() {
        let res = wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0], &[1.0, 1.0, 1.0, 1.0], 25).unwrap();
        assert_eq!(res.n_effective, 3);
        assert_eq!(
            wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0], 25).unwrap_err(),
            StatsError::AllZeroDifferences
        );
    }

    #[test]
    fn average_ranks_for_ties() {
        assert_eq!(doubled_ranks(&[1.0, -1.0, 3.0, 2.0]), [3, 3, 8, 6]);
        assert_eq!(tie_groups(&[1.0, -1.0, 3.0, 3.0, 3.0]), [2, 3]);
    }

    #[test]
    fn normal_mode_above_cutoff() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.7 + 1.0).collect();
        let y: Vec<f64> = (0..30).map(|i| (i as f64 * 1.3) % 11.0).collect();
        let res = wilcoxon_signed_rank(&x, &y, 25).unwrap();
        assert_eq!(res.mode, WilcoxonMode::NormalApproximation);
        assert!(res.p > 0.0 && res.p <= 1.0);
    }
}
