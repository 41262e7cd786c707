//! Search strategies over a [`ConfigSpace`](crate::space::ConfigSpace).

use crate::evaluator::EvalError;
use crate::objective::EvaluationRecord;
use crate::space::{Configuration, SpaceError};

pub mod ga;
pub mod random;
pub mod sequential;

pub use ga::{ga_search, GaResult, Generation};
pub use random::random_search;
pub use sequential::{sequential_search, SequentialOptions};

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("every candidate for `{0}` failed to evaluate")]
    SweepFailed(String),
    #[error("every individual of generation {0} failed to evaluate")]
    GenerationFailed(u32),
    #[error("no successful evaluation")]
    NoSuccess,
    #[error("invalid search parameters: {0}")]
    InvalidParams(String),
}

/// One completed sweep of the sequential search.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    pub param: String,
    pub value: f64,
    pub best_perplexity: f64,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best_config: Configuration,
    pub best_record: EvaluationRecord,
    /// Distinct configurations requested by this search, cache hits included.
    pub unique_evaluations: usize,
    pub trajectory: Vec<TrajectoryStep>,
    /// The search ran out of unseen configurations before meeting its budget.
    pub exhausted: bool,
}

/// First record with the lowest test perplexity.
pub(crate) fn argmin<'r>(
    records: impl IntoIterator<Item = &'r EvaluationRecord>,
) -> Option<&'r EvaluationRecord> {
    let mut best: Option<&EvaluationRecord> = None;
    for r in records {
        let Some(p) = r.test_perplexity() else {
            continue;
        };
        if best
            .and_then(|b| b.test_perplexity())
            .is_none_or(|bp| p < bp)
        {
            best = Some(r);
        }
    }
    best
}
