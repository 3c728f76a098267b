//! Wilcoxon signed-rank test for paired samples.

use statrs::distribution::{ContinuousCDF, Normal};

use super::StatsError;

/// Largest number of nonzero differences for which the exact null
/// distribution is used.
pub const EXACT_LIMIT: usize = 25;

#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    pub labels: Vec<String>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl PairedSample {
    pub fn new(labels: Vec<String>, a: Vec<f64>, b: Vec<f64>) -> Result<Self, StatsError> {
        if a.is_empty() || a.len() != b.len() || labels.len() != a.len() {
            return Err(StatsError::Invalid(format!(
                "paired sample needs equal non-zero lengths, got {} labels, {} and {} values",
                labels.len(),
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(StatsError::Invalid("paired sample contains non-finite values".into()));
        }
        Ok(PairedSample { labels, a, b })
    }

    /// Unlabelled sample; labels are the indices.
    pub fn from_values(a: Vec<f64>, b: Vec<f64>) -> Result<Self, StatsError> {
        let labels = (0..a.len()).map(|i| i.to_string()).collect();
        PairedSample::new(labels, a, b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WilcoxonResult {
    /// min(W⁺, W⁻).
    pub statistic: f64,
    pub p_value: f64,
    /// Differences left after discarding zeros.
    pub nonzero: usize,
    pub exact: bool,
    pub warning: Option<String>,
}

/// Two-sided signed-rank test of `a − b`. Zero differences are dropped and
/// tied magnitudes get mid-ranks.
pub fn wilcoxon_signed_rank(s: &PairedSample) -> WilcoxonResult {
    let diffs: Vec<f64> = s.a.iter().zip(&s.b).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    let k = diffs.len();
    if k == 0 {
        return WilcoxonResult {
            statistic: 0.0,
            p_value: 1.0,
            nonzero: 0,
            exact: true,
            warning: Some("all differences are zero".into()),
        };
    }
    let (doubled_ranks, tie_sizes) = doubled_mid_ranks(&diffs);
    let plus: u64 = diffs
        .iter()
        .zip(&doubled_ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();
    let total: u64 = doubled_ranks.iter().sum();
    let w2 = plus.min(total - plus);
    let statistic = w2 as f64 / 2.0;

    if k <= EXACT_LIMIT {
        let p = 2.0 * lower_tail(&doubled_ranks, w2);
        return WilcoxonResult {
            statistic,
            p_value: p.min(1.0),
            nonzero: k,
            exact: true,
            warning: None,
        };
    }
    let kf = k as f64;
    let mean = kf * (kf + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let var = kf * (kf + 1.0) * (2.0 * kf + 1.0) / 24.0 - tie_term;
    let z = (statistic - mean) / var.sqrt();
    let normal = Normal::standard();
    WilcoxonResult {
        statistic,
        p_value: (2.0 * normal.cdf(z)).min(1.0),
        nonzero: k,
        exact: false,
        warning: None,
    }
}

/// Twice the mid-ranks of |d| (always integral) and the sizes of tie groups.
fn doubled_mid_ranks(diffs: &[f64]) -> (Vec<u64>, Vec<u64>) {
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    let mut ranks = vec![0u64; diffs.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && diffs[order[end]].abs() == diffs[order[start]].abs() {
            end += 1;
        }
        // ranks start+1 ..= end, doubled mid-rank = start + 1 + end
        for &i in &order[start..end] {
            ranks[i] = (start + 1 + end) as u64;
        }
        ties.push((end - start) as u64);
        start = end;
    }
    (ranks, ties)
}

/// P(W⁺ ≤ w) under the null, by counting sign subsets per rank sum.
fn lower_tail(doubled_ranks: &[u64], w: u64) -> f64 {
    let total: u64 = doubled_ranks.iter().sum();
    let mut counts = vec![0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let hits: f64 = counts[..=w as usize].iter().sum();
    hits / 2f64.powi(doubled_ranks.len() as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test(a: &[f64], b: &[f64]) -> WilcoxonResult {
        wilcoxon_signed_rank(&PairedSample::from_values(a.to_vec(), b.to_vec()).unwrap())
    }

    #[test]
    fn identical_samples_give_one() {
        let r = test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]);
        assert_eq!(r.p_value, 1.0);
        assert!(r.warning.is_some());
    }

    #[test]
    fn six_positive_pairs() {
        let a = [1.5, 2.7, 3.1, 4.9, 5.2, 6.8];
        let b = [1.0, 2.0, 2.0, 3.0, 2.0, 1.0];
        let r = test(&a, &b);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 0.03125);
    }

    #[test]
    fn ties_use_mid_ranks() {
        let (ranks, ties) = doubled_mid_ranks(&[1.0, -1.0, 2.0, 3.0, -3.0, 3.0]);
        assert_eq!(ranks, [3, 3, 6, 10, 10, 10]);
        assert_eq!(ties, [2, 1, 3]);
    }

    #[test]
    fn large_sample_uses_normal_approximation() {
        let a: Vec<f64> = (0..40).map(|i| i as f64 + 0.5).collect();
        let b: Vec<f64> = (0..40).map(|i| if i % 3 == 0 { i as f64 + 1.0 } else { i as f64 }).collect();
        let r = test(&a, &b);
        assert!(!r.exact);
        assert!(r.p_value > 0.0 && r.p_value < 1.0);
        let flipped = test(&b, &a);
        assert_eq!(r.p_value, flipped.p_value);
    }

    #[test]
    fn unequal_lengths_rejected() {
        assert!(PairedSample::from_values(vec![1.0], vec![]).is_err());
        assert!(PairedSample::from_values(vec![f64::NAN], vec![1.0]).is_err());
    }
}
