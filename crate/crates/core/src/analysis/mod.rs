//! Per-hyperparameter sensitivity analysis of journaled evaluations.
//!
//! For each hyperparameter the perplexities observed with its default value
//! are compared against those observed with any other value. A two-sided
//! Mann–Whitney test decides between a significantly better or worse default;
//! otherwise the default is classed by how close its group median sits to the
//! best group median.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::objective::EvaluationRecord;
use crate::space::{format_value, ConfigSpace, Configuration};

pub mod export;
pub mod mann_whitney;
pub mod stats;
pub mod svg;

pub use mann_whitney::{mann_whitney, TestError};
pub use stats::{median, quantile_sorted};

use stats::BoxStats;

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_NEAR_THRESHOLD: f64 = 0.01;

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("no successful evaluations to analyze")]
    Empty,
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("the default configuration has no successful evaluation")]
    DefaultMissing,
    #[error("need at least one successful evaluation besides the default configuration")]
    NoAlternative,
    #[error("nothing to plot")]
    NoGroups,
    #[error("report has no parameters")]
    EmptyReport,
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    /// Default group significantly lower.
    Better,
    /// No significant difference, default at or near the best median.
    NotWorseNearBest,
    /// No significant difference, default away from the best median.
    NotWorseNotBest,
    /// Default group significantly higher.
    Worse,
    /// The default value or any alternative was never observed.
    Unanalyzable,
}

impl Bucket {
    pub fn as_str(self) -> &'static str {
        match self {
            Bucket::Better => "better",
            Bucket::NotWorseNearBest => "not_worse_near_best",
            Bucket::NotWorseNotBest => "not_worse_not_best",
            Bucket::Worse => "worse",
            Bucket::Unanalyzable => "unanalyzable",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Groups successful perplexities by the value `param` took, in ascending value order.
pub fn group_stats(
    records: &[EvaluationRecord],
    param: &str,
) -> Result<Vec<BoxStats<f64>>, AnalysisError> {
    let groups = grouped(records, param)?;
    Ok(groups
        .iter()
        .map(|(v, s)| BoxStats::from_sample(v.0, s))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Value(f64);

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn grouped(
    records: &[EvaluationRecord],
    param: &str,
) -> Result<BTreeMap<Value, Vec<f64>>, AnalysisError> {
    let ok: Vec<&EvaluationRecord> = records
        .iter()
        .filter(|r| r.test_perplexity().is_some())
        .collect();
    if ok.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let mut groups: BTreeMap<Value, Vec<f64>> = BTreeMap::new();
    for r in ok {
        let v = r
            .config
            .get(param)
            .ok_or_else(|| AnalysisError::UnknownParam(param.to_string()))?;
        let v = if v == 0.0 { 0.0 } else { v };
        groups
            .entry(Value(v))
            .or_default()
            .push(r.test_perplexity().unwrap());
    }
    Ok(groups)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamReport {
    pub name: String,
    pub bucket: Bucket,
    pub p_value: Option<f64>,
    pub u: Option<f64>,
    pub exact: Option<bool>,
    pub default_value: f64,
    pub best_value: f64,
    pub groups: Vec<BoxStats<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub test: String,
    pub alpha: f64,
    pub near_threshold: f64,
    pub grouping: String,
    pub ok_records: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub metadata: ReportMetadata,
    pub parameters: Vec<ParamReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
}

/// Classifies every parameter of `space` by how its default value fares.
pub fn categorize(
    space: &ConfigSpace,
    records: &[EvaluationRecord],
    default_config: &Configuration,
    alpha: f64,
    near_threshold: f64,
) -> Result<SensitivityReport, AnalysisError> {
    let ok_records = records
        .iter()
        .filter(|r| r.test_perplexity().is_some())
        .count();
    if ok_records == 0 {
        return Err(AnalysisError::Empty);
    }
    let mut parameters = Vec::with_capacity(space.len());
    for p in space.params() {
        let default_value = default_config
            .get(&p.name)
            .ok_or_else(|| AnalysisError::UnknownParam(p.name.clone()))?;
        parameters.push(categorize_param(
            records,
            &p.name,
            default_value,
            alpha,
            near_threshold,
        )?);
    }
    Ok(SensitivityReport {
        metadata: ReportMetadata {
            test: "mann-whitney-u, two-sided".into(),
            alpha,
            near_threshold,
            grouping: "default value vs all other values".into(),
            ok_records,
            run_id: None,
            generated_at: None,
        },
        parameters,
        comparison: None,
    })
}

fn categorize_param(
    records: &[EvaluationRecord],
    name: &str,
    default_value: f64,
    alpha: f64,
    near_threshold: f64,
) -> Result<ParamReport, AnalysisError> {
    let groups = grouped(records, name)?;
    let stats: Vec<BoxStats<f64>> = groups
        .iter()
        .map(|(v, s)| BoxStats::from_sample(v.0, s))
        .collect();
    let best = stats
        .iter()
        .fold(None::<&BoxStats<f64>>, |acc, s| match acc {
            Some(b) if b.median <= s.median => Some(b),
            _ => Some(s),
        })
        .expect("at least one group");
    let best_value = best.value;
    let best_median = best.median;

    let default_sample = groups.get(&Value(default_value));
    let rest: Vec<f64> = groups
        .iter()
        .filter(|(v, _)| v.0 != default_value)
        .flat_map(|(_, s)| s.iter().copied())
        .collect();
    let mut report = ParamReport {
        name: name.to_string(),
        bucket: Bucket::Unanalyzable,
        p_value: None,
        u: None,
        exact: None,
        default_value,
        best_value,
        groups: stats.clone(),
    };
    let Some(default_sample) = default_sample.filter(|_| !rest.is_empty()) else {
        return Ok(report);
    };
    let test = mann_whitney(default_sample, &rest).expect("non-empty finite samples");
    let half = (default_sample.len() * rest.len()) as f64 / 2.0;
    let default_median = median(default_sample);
    report.bucket = if test.p_value < alpha && test.u < half {
        Bucket::Better
    } else if test.p_value < alpha && test.u > half {
        Bucket::Worse
    } else if default_value == best_value
        || (default_median - best_median) / best_median <= near_threshold
    {
        Bucket::NotWorseNearBest
    } else {
        Bucket::NotWorseNotBest
    };
    report.p_value = Some(test.p_value);
    report.u = Some(test.u);
    report.exact = Some(test.exact);
    Ok(report)
}

/// Default configuration against the best evaluation found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub default_ppl: f64,
    pub best_ppl: f64,
    pub best_config: Configuration,
    /// Parameters where the best configuration departs from the default, in space order.
    pub changed_params: Vec<String>,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let changed = if self.changed_params.is_empty() {
            "none".to_string()
        } else {
            self.changed_params.join(", ")
        };
        write!(
            f,
            "{:.2} → {:.2}, changed: {changed}",
            self.default_ppl, self.best_ppl
        )
    }
}

pub fn compare_default_vs_best(
    space: &ConfigSpace,
    records: &[EvaluationRecord],
    default_config: &Configuration,
) -> Result<Comparison, AnalysisError> {
    let key = default_config.canonical_key();
    let ok: Vec<&EvaluationRecord> = records
        .iter()
        .filter(|r| r.test_perplexity().is_some())
        .collect();
    let default_ppl = ok
        .iter()
        .rev()
        .find(|r| r.canonical_key == key)
        .and_then(|r| r.test_perplexity())
        .ok_or(AnalysisError::DefaultMissing)?;
    if ok.iter().all(|r| r.canonical_key == key) {
        return Err(AnalysisError::NoAlternative);
    }
    let best = crate::search::argmin(ok.iter().copied()).expect("non-empty");
    let best_ppl = best.test_perplexity().unwrap();
    let best_config = if best_ppl == default_ppl {
        default_config.clone()
    } else {
        best.config.clone()
    };
    let changed_params = space
        .params()
        .iter()
        .filter(|p| best_config.get(&p.name) != default_config.get(&p.name))
        .map(|p| p.name.clone())
        .collect();
    Ok(Comparison {
        default_ppl,
        best_ppl,
        best_config,
        changed_params,
    })
}

pub(crate) fn fmt_num(v: f64) -> String {
    format_value(v)
}
