//! Paired HDS vs Sobol statistics: geometric means, improvement ratios,
//! Wilcoxon signed-rank p-values and bootstrap confidence intervals.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::bench::experiment::TrialRecord;
use crate::bench::functions::FunctionId;
use crate::de::InitMethod;
use crate::error::{HdsError, Result};
use crate::numerics::RngStream;

pub const ERROR_FLOOR: f64 = 1e-12;
pub const BOOTSTRAP_RESAMPLES: usize = 10_000;
/// Largest number of non-zero differences handled by the exact null distribution.
pub const EXACT_WILCOXON_LIMIT: usize = 50;

/// One row of the comparison table, for a single (N, D) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub n: usize,
    pub dims: usize,
    pub hds_gm_error: f64,
    pub sobol_gm_error: f64,
    /// Sobol GM error over HDS GM error; above 1 favours HDS.
    pub ratio: f64,
    pub p_value: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    /// Sobol total time over HDS total time; below 1 means HDS was slower.
    pub runtime_ratio: f64,
    pub functions: usize,
    pub pairs: usize,
}

fn floored_ln(x: f64) -> f64 {
    // NaN compares false and is floored as well
    if x >= ERROR_FLOOR {
        x.ln()
    } else {
        ERROR_FLOOR.ln()
    }
}

/// Geometric mean with every value floored at `ERROR_FLOOR`.
pub fn geometric_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    (values.iter().map(|&v| floored_ln(v)).sum::<f64>() / values.len() as f64).exp()
}

/// Average ranks (1-based) of `values`, ties sharing their mean rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j + 2) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided Wilcoxon signed-rank p-value for paired differences.
///
/// Zero differences are dropped; with none left the p-value is 1. Up to
/// `EXACT_WILCOXON_LIMIT` differences the exact permutation distribution of
/// the (possibly tied) ranks is used, above it the normal approximation with
/// tie and continuity corrections.
pub fn wilcoxon_signed_rank(diffs: &[f64]) -> f64 {
    let d: Vec<f64> = diffs
        .iter()
        .copied()
        .filter(|x| *x != 0.0 && !x.is_nan())
        .collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = d
        .iter()
        .zip(&ranks)
        .filter(|(x, _)| **x > 0.0)
        .map(|(_, r)| r)
        .sum();

    if n <= EXACT_WILCOXON_LIMIT {
        // ranks are multiples of 1/2, so doubled ranks are integers
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let total: usize = doubled.iter().sum();
        let mut counts = vec![0.0f64; total + 1];
        counts[0] = 1.0;
        let mut reach = 0;
        for &r in &doubled {
            for s in (0..=reach).rev() {
                if counts[s] != 0.0 {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        let all = 2f64.powi(n as i32);
        let w = (2.0 * w_plus).round() as usize;
        let lower: f64 = counts[..=w].iter().sum::<f64>() / all;
        let upper: f64 = counts[w..].iter().sum::<f64>() / all;
        return (2.0 * lower.min(upper)).min(1.0);
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;
    let mut sorted = abs.clone();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        var -= (t * t * t - t) / 48.0;
        i = j + 1;
    }
    if var <= 0.0 {
        return 1.0;
    }
    let dev = ((w_plus - mean).abs() - 0.5).max(0.0);
    let z = dev / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

/// Percentile bootstrap interval of `exp(mean over groups of mean(group))`,
/// resampling within each group.
pub fn bootstrap_ratio_ci(
    groups: &[Vec<f64>],
    resamples: usize,
    rng: &mut RngStream,
) -> (f64, f64) {
    let groups: Vec<&Vec<f64>> = groups.iter().filter(|g| !g.is_empty()).collect();
    if groups.is_empty() || resamples == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut stats = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut acc = 0.0;
        for g in &groups {
            let s: f64 = (0..g.len()).map(|_| g[rng.index(g.len())]).sum();
            acc += s / g.len() as f64;
        }
        stats.push((acc / groups.len() as f64).exp());
    }
    stats.sort_by(f64::total_cmp);
    (percentile(&stats, 0.025), percentile(&stats, 0.975))
}

/// Linear-interpolated percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

type PairKey = (usize, usize, FunctionId, usize);
type Cell<'a> = BTreeMap<FunctionId, Vec<(&'a TrialRecord, &'a TrialRecord)>>;

/// Pairs the records and returns one summary per (N, D), ordered by N then D.
///
/// Fails on a record without a partner of the other method or on duplicates.
pub fn summarize(records: &[TrialRecord], bootstrap_seed: u64) -> Result<Vec<ComparisonSummary>> {
    let mut pairs: BTreeMap<PairKey, (Option<&TrialRecord>, Option<&TrialRecord>)> =
        BTreeMap::new();
    for r in records {
        let slot = pairs.entry((r.n, r.dims, r.function, r.trial)).or_default();
        let target = match r.method {
            InitMethod::Hds => &mut slot.0,
            InitMethod::Sobol => &mut slot.1,
        };
        if target.is_some() {
            return Err(HdsError::State(format!("duplicate record for {}", r.key())));
        }
        *target = Some(r);
    }

    // (n, dims) -> function -> paired records
    let mut cells: BTreeMap<(usize, usize), Cell> = BTreeMap::new();
    for ((n, dims, function, trial), (h, s)) in &pairs {
        match (h, s) {
            (Some(h), Some(s)) => cells
                .entry((*n, *dims))
                .or_default()
                .entry(*function)
                .or_default()
                .push((h, s)),
            _ => {
                let missing = if h.is_none() {
                    InitMethod::Hds
                } else {
                    InitMethod::Sobol
                };
                return Err(HdsError::State(format!(
                    "unpaired record: function={function} dims={dims} n={n} trial={trial} has no {missing} partner"
                )));
            }
        }
    }

    let mut out = Vec::with_capacity(cells.len());
    for ((n, dims), by_function) in cells {
        let mut hds_log = 0.0;
        let mut sobol_log = 0.0;
        let mut diffs = Vec::new();
        let mut groups = Vec::with_capacity(by_function.len());
        let (mut hds_time, mut sobol_time) = (0.0, 0.0);
        for (function, trials) in &by_function {
            let t = trials.len() as f64;
            hds_log +=
                geometric_mean(&trials.iter().map(|p| p.0.final_error).collect::<Vec<_>>()).ln();
            sobol_log +=
                geometric_mean(&trials.iter().map(|p| p.1.final_error).collect::<Vec<_>>()).ln();
            let g: Vec<f64> = trials
                .iter()
                .map(|(h, s)| floored_ln(s.final_error) - floored_ln(h.final_error))
                .collect();
            diffs.extend_from_slice(&g);
            groups.push(g);
            hds_time += trials.iter().map(|p| p.0.wall_time).sum::<f64>();
            sobol_time += trials.iter().map(|p| p.1.wall_time).sum::<f64>();
            debug_assert!(t > 0.0, "{function}");
        }
        let k = by_function.len() as f64;
        let hds_gm = (hds_log / k).exp();
        let sobol_gm = (sobol_log / k).exp();
        let mut rng = RngStream::new(bootstrap_seed).derive(&format!("bootstrap/{n}/{dims}"));
        let (ci95_low, ci95_high) = bootstrap_ratio_ci(&groups, BOOTSTRAP_RESAMPLES, &mut rng);
        out.push(ComparisonSummary {
            n,
            dims,
            hds_gm_error: hds_gm,
            sobol_gm_error: sobol_gm,
            ratio: sobol_gm / hds_gm,
            p_value: wilcoxon_signed_rank(&diffs),
            ci95_low,
            ci95_high,
            runtime_ratio: if hds_time > 0.0 {
                sobol_time / hds_time
            } else {
                f64::NAN
            },
            functions: by_function.len(),
            pairs: diffs.len(),
        });
    }
    Ok(out)
}

/// Plain-text comparison table with one line per (N, D).
pub fn format_table(summaries: &[ComparisonSummary]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>6} {:>4} {:>11} {:>11} {:>7} {:>9} {:>17} {:>8}",
        "N", "D", "HDS Err.", "Sobol Err.", "Ratio", "p-Val", "CI95", "Runtime"
    );
    for r in summaries {
        let _ = writeln!(
            s,
            "{:>6} {:>4} {:>11.3e} {:>11.3e} {:>7.3} {:>9.2e} {:>17} {:>8.3}",
            r.n,
            r.dims,
            r.hds_gm_error,
            r.sobol_gm_error,
            r.ratio,
            r.p_value,
            format!("({:.2}, {:.2})", r.ci95_low, r.ci95_high),
            r.runtime_ratio
        );
    }
    if summaries.len() > 1 {
        let overall =
            (summaries.iter().map(|r| r.ratio.ln()).sum::<f64>() / summaries.len() as f64).exp();
        let _ = writeln!(s, "overall GM ratio {overall:.3}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_mean_basics() {
        assert!((geometric_mean(&[1.0, 10.0, 100.0]) - 10.0).abs() < 1e-12);
        assert!((geometric_mean(&[0.0, 1e-12]) - 1e-12).abs() < 1e-24);
        assert!(geometric_mean(&[]).is_nan());
    }

    #[test]
    fn wilcoxon_matches_reference_values() {
        // exact, no ties
        let d = [0.3, -1.2, 2.5, 0.7, -0.4, 1.9, 3.1, -0.05, 0.8, 1.1];
        assert!((wilcoxon_signed_rank(&d) - 0.10546875).abs() < 1e-12);
        let d = [1.0, 2.0, -3.0, 4.0, 5.0, 6.0, -7.0, 8.0];
        assert!((wilcoxon_signed_rank(&d) - 0.3125).abs() < 1e-12);
    }

    #[test]
    fn wilcoxon_normal_approximation() {
        let d = [
            0.6, 1.1, 0.6, -1.0, 1.2, 0.7, -0.2, 0.9, 0.7, 0.6, 0.3, 0.8, -0.4, 0.1, -0.2, 0.9,
            0.3, 0.0, -0.5, 0.0, 0.3, 0.0, 1.6, 1.3, -2.4, -1.6, 0.1, -0.1, 0.5, 0.5, 2.4, -0.8,
            -0.1, 2.3, 0.9, 1.0, -0.2, -1.3, 0.5, 0.4, -0.9, -0.4, 0.2, -0.6, 0.2, 0.4, 0.3, -0.2,
            0.9, 1.2, 0.6, -0.5, 1.0, -0.2, 1.2, -0.8, 1.2, 0.3, -0.9, -0.0, 0.4, 0.6, -0.7, -0.8,
            0.5, -0.2, 0.5, 1.1, -1.3, 0.6, 1.5, 0.0, -0.5, 1.1, 0.6, 1.2, -0.0, -1.2, 0.2, -0.1,
        ];
        assert!((wilcoxon_signed_rank(&d) - 0.010117337855907205).abs() < 1e-9);
    }

    #[test]
    fn exact_with_ties_matches_enumeration() {
        let d = [
            1.0, -1.0, 2.0, 2.0, -3.0, 3.0, 3.0, 4.0, -0.5, 5.0, 5.0, 6.0,
        ];
        let n = d.len();
        let abs: Vec<f64> = d.iter().map(|x: &f64| x.abs()).collect();
        let ranks = average_ranks(&abs);
        let observed: f64 = d
            .iter()
            .zip(&ranks)
            .filter(|(x, _)| **x > 0.0)
            .map(|(_, r)| r)
            .sum();
        let mut le = 0usize;
        let mut ge = 0usize;
        for mask in 0u32..(1 << n) {
            let w: f64 = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| ranks[i])
                .sum();
            if w <= observed + 1e-9 {
                le += 1;
            }
            if w >= observed - 1e-9 {
                ge += 1;
            }
        }
        let want = (2.0 * le.min(ge) as f64 / (1u64 << n) as f64).min(1.0);
        assert!((wilcoxon_signed_rank(&d) - want).abs() < 1e-12);
    }

    #[test]
    fn zero_differences_give_one() {
        assert_eq!(wilcoxon_signed_rank(&[0.0; 10]), 1.0);
        assert_eq!(wilcoxon_signed_rank(&[]), 1.0);
    }

    #[test]
    fn bootstrap_is_seeded() {
        let groups = vec![vec![0.1, 0.5, -0.2, 0.3], vec![0.0, 0.2, 0.4]];
        let a = bootstrap_ratio_ci(&groups, 1000, &mut RngStream::new(4));
        let b = bootstrap_ratio_ci(&groups, 1000, &mut RngStream::new(4));
        assert_eq!(a, b);
        assert!(a.0 < a.1);
        let point = ((0.7 / 4.0 + 0.2) / 2.0f64).exp();
        assert!(a.0 <= point && point <= a.1);
    }

    #[test]
    fn percentile_interpolates() {
        let v: Vec<f64> = (0..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.025), 2.5);
        assert_eq!(percentile(&v, 0.975), 97.5);
    }

    fn record(method: InitMethod, function: FunctionId, trial: usize, err: f64) -> TrialRecord {
        TrialRecord {
            method,
            function,
            dims: 10,
            n: 64,
            trial,
            final_error: err,
            wall_time: 1.0,
            evaluations: 6464,
        }
    }

    fn paired(hds: &[f64], sobol: &[f64]) -> Vec<TrialRecord> {
        let mut out = Vec::new();
        for (f, function) in [FunctionId::Sphere, FunctionId::Ackley]
            .into_iter()
            .enumerate()
        {
            for (t, (&h, &s)) in hds.iter().zip(sobol).enumerate() {
                out.push(record(InitMethod::Hds, function, t, h * (f + 1) as f64));
                out.push(record(InitMethod::Sobol, function, t, s * (f + 1) as f64));
            }
        }
        out
    }

    #[test]
    fn identical_errors_give_unit_ratio() {
        let e = [1e-3, 0.5, 2.0, 0.0, 7.0];
        let s = summarize(&paired(&e, &e), 1).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0].ratio - 1.0).abs() < 1e-12);
        assert!(s[0].p_value >= 0.99);
        assert_eq!((s[0].ci95_low, s[0].ci95_high), (1.0, 1.0));
        assert_eq!(s[0].runtime_ratio, 1.0);
        assert_eq!((s[0].functions, s[0].pairs), (2, 10));
    }

    #[test]
    fn ratio_is_sobol_over_hds() {
        let h = [1.0, 10.0, 100.0];
        let sb = [2.0, 20.0, 200.0];
        let s = summarize(&paired(&h, &sb), 1).unwrap();
        assert!((s[0].ratio - 2.0).abs() < 1e-12);
        // sphere GM 10, ackley GM 20
        assert!((s[0].hds_gm_error - 200f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn unpaired_records_rejected() {
        let mut recs = paired(&[1.0, 2.0], &[1.0, 3.0]);
        recs.remove(1);
        let err = summarize(&recs, 0).unwrap_err().to_string();
        assert!(
            err.contains("function=sphere") && err.contains("trial=0"),
            "{err}"
        );
        let mut dup = paired(&[1.0, 2.0], &[1.0, 3.0]);
        dup.push(dup[0].clone());
        assert!(summarize(&dup, 0).is_err());
    }

    #[test]
    fn summary_is_deterministic() {
        let recs = paired(&[0.1, 0.3, 0.2, 0.9], &[0.2, 0.2, 0.5, 1.0]);
        assert_eq!(summarize(&recs, 5).unwrap(), summarize(&recs, 5).unwrap());
        assert!(format_table(&summarize(&recs, 5).unwrap()).contains("Ratio"));
    }
}
