//! Two-sided Mann–Whitney U (Wilcoxon rank-sum) test.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::Scalar;

/// Largest pooled sample size for which the exact null distribution is used.
pub const EXACT_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney<T> {
    /// U statistic of the first sample: its rank sum minus `n_a (n_a + 1) / 2`.
    pub u: T,
    pub p_value: T,
    /// Whether `p_value` comes from the exact permutation distribution.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TestError {
    #[error("both samples must be non-empty")]
    EmptySample,
    #[error("samples must not contain NaN")]
    NaN,
}

/// Midranks (1-based) of the pooled sample, plus `Σ (t³ − t)` over tie groups.
fn midranks<T: Scalar>(pooled: &[T]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].partial_cmp(&pooled[j]).expect("no NaN"));
    let mut ranks = vec![0.0; pooled.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    (ranks, tie_term)
}

/// Number of ways each U value arises when `m` of `m + n` distinct ranks go to the first sample.
fn u_distribution(m: usize, n: usize) -> Vec<u64> {
    // counts[k][s]: k-subsets of {1..=i} whose rank sum minus k(k+1)/2 equals s.
    let max_u = m * n;
    let mut counts = vec![vec![0u64; max_u + 1]; m + 1];
    counts[0][0] = 1;
    for i in 1..=(m + n) {
        for k in (1..=m.min(i)).rev() {
            // Adding rank i as the k-th smallest chosen element shifts U by i − k.
            let shift = i - k;
            if shift > n {
                continue;
            }
            for s in (0..=max_u - shift).rev() {
                let c = counts[k - 1][s];
                if c > 0 {
                    counts[k][s + shift] += c;
                }
            }
        }
    }
    counts.swap_remove(m)
}

pub fn mann_whitney<T: Scalar>(a: &[T], b: &[T]) -> Result<MannWhitney<T>, TestError> {
    if a.is_empty() || b.is_empty() {
        return Err(TestError::EmptySample);
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(TestError::NaN);
    }
    let (m, n) = (a.len(), b.len());
    let pooled: Vec<T> = a.iter().chain(b).copied().collect();
    let (ranks, tie_term) = midranks(&pooled);
    let rank_sum: f64 = ranks[..m].iter().sum();
    let u = rank_sum - (m * (m + 1)) as f64 / 2.0;

    let (p, exact) = if m + n <= EXACT_LIMIT && tie_term == 0.0 {
        let dist = u_distribution(m, n);
        let total: u64 = dist.iter().sum();
        let u_int = u.round() as usize;
        let lower: u64 = dist[..=u_int].iter().sum();
        let upper: u64 = dist[u_int..].iter().sum();
        let p = 2.0 * lower.min(upper) as f64 / total as f64;
        (p.min(1.0), true)
    } else {
        let (mf, nf) = (m as f64, n as f64);
        let big_n = mf + nf;
        let mean = mf * nf / 2.0;
        let var = mf * nf / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
        let p = if var <= 0.0 {
            1.0
        } else {
            let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
            erfc(z / std::f64::consts::SQRT_2).min(1.0)
        };
        (p, false)
    };
    Ok(MannWhitney {
        u: T::from_f64(u).unwrap(),
        p_value: T::from_f64(p).unwrap(),
        exact,
    })
}
