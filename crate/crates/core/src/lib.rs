//! Hyperparameter-space characterization for black-box objectives.
//!
//! The crate models a discrete hyperparameter grid ([`space`]), evaluates
//! configurations through pluggable objectives with caching and an
//! append-only journal ([`objective`], [`evaluator`], [`journal`]), searches
//! the grid sequentially or with a genetic algorithm ([`search`]), and
//! summarizes the journaled evaluations per hyperparameter ([`analysis`]).
//!
//! Numeric kernels that do not depend on the grid representation (quartiles,
//! rank tests, fitness and roulette selection) are generic over [`Scalar`];
//! the aliases below fix them to `f64`, which is what journals store.

pub mod analysis;
pub mod evaluator;
pub mod journal;
pub mod objective;
pub mod search;
pub mod space;

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point type accepted by the generic numeric kernels.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

pub type BoxStats = analysis::stats::BoxStats<f64>;
pub type BoxStatsF32 = analysis::stats::BoxStats<f32>;
pub type MannWhitney = analysis::mann_whitney::MannWhitney<f64>;
pub type MannWhitneyF32 = analysis::mann_whitney::MannWhitney<f32>;

pub use evaluator::{EvalError, EvalRequest, Evaluator, EvaluatorOptions};
pub use journal::{JournalError, JournalHeader, JournalWriter, RunJournal};
pub use objective::{Budget, EvaluationRecord, Objective, ObjectiveSpec, Outcome, Source, Status};
pub use search::{ga::GaParams, SearchError, SearchResult};
pub use space::{ConfigSpace, Configuration, ParamKind, ParamSpec, SpaceError};
