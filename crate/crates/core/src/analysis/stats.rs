//! Five-number summaries with Tukey outliers.

use serde::{Deserialize, Serialize};

use crate::Scalar;

/// Linear-interpolation quantile of sorted data at position `q · (n − 1)`.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], q: T) -> T {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let n = sorted.len();
    let pos = q * T::from_usize(n - 1).unwrap();
    let lo = pos.floor();
    let i = lo.to_usize().unwrap().min(n - 1);
    if i + 1 >= n {
        return sorted[n - 1];
    }
    let frac = pos - lo;
    sorted[i] + (sorted[i + 1] - sorted[i]) * frac
}

pub fn median<T: Scalar>(sample: &[T]) -> T {
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    quantile_sorted(&s, T::from_f64(0.5).unwrap())
}

/// Box-and-whisker summary of the perplexities observed at one parameter value.
///
/// `min` and `max` are the whisker ends: the most extreme observations inside
/// the 1.5 · IQR fences. Observations beyond the fences are listed in `outliers`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats<T> {
    pub value: f64,
    pub n: usize,
    pub min: T,
    pub q1: T,
    pub median: T,
    pub q3: T,
    pub max: T,
    pub outliers: Vec<T>,
}

impl<T: Scalar> BoxStats<T> {
    /// Summarizes a non-empty sample of finite values.
    pub fn from_sample(value: f64, sample: &[T]) -> Self {
        let mut s = sample.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
        let q1 = quantile_sorted(&s, T::from_f64(0.25).unwrap());
        let median = quantile_sorted(&s, T::from_f64(0.5).unwrap());
        let q3 = quantile_sorted(&s, T::from_f64(0.75).unwrap());
        let reach = T::from_f64(1.5).unwrap() * (q3 - q1);
        let (lo_fence, hi_fence) = (q1 - reach, q3 + reach);
        let inside: Vec<T> = s
            .iter()
            .copied()
            .filter(|&x| x >= lo_fence && x <= hi_fence)
            .collect();
        let outliers = s
            .iter()
            .copied()
            .filter(|&x| x < lo_fence || x > hi_fence)
            .collect();
        BoxStats {
            value,
            n: s.len(),
            min: inside.first().copied().unwrap_or(q1).min(q1),
            q1,
            median,
            q3,
            max: inside.last().copied().unwrap_or(q3).max(q3),
            outliers,
        }
    }
}
