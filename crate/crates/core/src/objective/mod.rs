//! Evaluation contract: configuration in, test perplexity out.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::space::Configuration;

pub mod spec;
pub mod surrogate;
pub mod table;
pub mod worker;

pub use spec::{ObjectiveSpec, SpecError};
pub use surrogate::{CoupledSurrogate, PairTerm, SeparableSurrogate};
pub use table::TableOracle;
pub use worker::{WorkerError, WorkerObjective, WorkerSettings};

pub const TEST_PERPLEXITY: &str = "test_perplexity";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error,
    Timeout,
}

/// Which search produced an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Sequential,
    Ga,
    Random,
    Baseline,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Sequential => "sequential",
            Source::Ga => "ga",
            Source::Random => "random",
            Source::Baseline => "baseline",
        }
    }
}

/// Training budget forwarded to objectives that train something.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub epochs: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { epochs: 5 }
    }
}

/// What an objective reports for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub metrics: BTreeMap<String, f64>,
    pub message: Option<String>,
}

impl Outcome {
    pub fn ok(test_perplexity: f64) -> Self {
        Outcome {
            status: Status::Ok,
            metrics: [(TEST_PERPLEXITY.to_string(), test_perplexity)]
                .into_iter()
                .collect(),
            message: None,
        }
    }

    pub fn with_metrics(metrics: BTreeMap<String, f64>) -> Self {
        Outcome {
            status: Status::Ok,
            metrics,
            message: None,
        }
    }

    pub fn error(message: impl Into<String>) -> Self {
        Outcome {
            status: Status::Error,
            metrics: BTreeMap::new(),
            message: Some(message.into()),
        }
    }

    pub fn timeout(message: impl Into<String>) -> Self {
        Outcome {
            status: Status::Timeout,
            metrics: BTreeMap::new(),
            message: Some(message.into()),
        }
    }

    /// Demotes an `ok` outcome without a usable perplexity to an error.
    pub(crate) fn checked(self) -> Self {
        if self.status != Status::Ok {
            if self.message.is_none() {
                return Outcome {
                    message: Some(format!("{:?}", self.status).to_lowercase()),
                    ..self
                };
            }
            return self;
        }
        match self.metrics.get(TEST_PERPLEXITY) {
            Some(p) if p.is_finite() && *p > 0.0 => self,
            Some(p) => Outcome::error(format!("invalid test_perplexity {p}")),
            None => Outcome::error("missing test_perplexity"),
        }
    }
}

/// One objective evaluation as stored in the journal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub config: Configuration,
    pub canonical_key: String,
    pub seed: u64,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    pub status: Status,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation: Option<u32>,
    #[serde(default)]
    pub wall_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    /// Set on records served from the cache; never journaled.
    #[serde(default, skip_serializing)]
    pub cached: bool,
}

impl EvaluationRecord {
    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    pub fn test_perplexity(&self) -> Option<f64> {
        if self.is_ok() {
            self.metrics.get(TEST_PERPLEXITY).copied()
        } else {
            None
        }
    }
}

/// A black-box function from configurations to metrics.
///
/// Implementations report failures through [`Outcome`] rather than panicking.
pub trait Objective: Send + Sync {
    fn evaluate(&self, config: &Configuration, seed: u64, budget: &Budget) -> Outcome;
}

impl<F> Objective for F
where
    F: Fn(&Configuration) -> f64 + Send + Sync,
{
    fn evaluate(&self, config: &Configuration, _seed: u64, _budget: &Budget) -> Outcome {
        Outcome::ok(self(config))
    }
}
