//! Coordinate-wise sweep: optimize one hyperparameter at a time in space
//! order, fixing each at its best value before moving to the next.

use std::collections::HashSet;

use super::{SearchError, SearchResult, TrajectoryStep};
use crate::evaluator::{EvalRequest, Evaluator};
use crate::objective::{EvaluationRecord, Source};
use crate::space::{Configuration, SpaceError};

#[derive(Debug, Clone, Default)]
pub struct SequentialOptions {
    /// Sweep order; defaults to the space's declaration order.
    pub order: Option<Vec<String>>,
    /// Repeat full passes until a pass changes nothing.
    pub until_fixed_point: bool,
}

pub fn sequential_search(
    ev: &Evaluator<'_>,
    start: &Configuration,
    options: &SequentialOptions,
) -> Result<SearchResult, SearchError> {
    let space = ev.space();
    let seed = ev.options().eval_seed;
    let order: Vec<String> = match &options.order {
        Some(order) => {
            for name in order {
                if space.param(name).is_none() {
                    return Err(SpaceError::UnknownParam(name.clone()).into());
                }
            }
            order.clone()
        }
        None => space.params().iter().map(|p| p.name.clone()).collect(),
    };

    let mut requested = HashSet::new();
    let start_record = ev.evaluate(EvalRequest::new(start.clone(), seed, Source::Sequential))?;
    requested.insert(start_record.canonical_key.clone());
    let mut incumbent = start.clone();
    let mut incumbent_record = start_record;
    let mut trajectory = Vec::new();

    loop {
        let mut changed = false;
        for name in &order {
            let spec = space.param(name).expect("order was validated");
            let current = incumbent.get(name).expect("start was validated");
            let mut candidates = spec.grid.clone();
            if spec.index_of(current).is_none() {
                let at = candidates.partition_point(|&g| g < current);
                candidates.insert(at, current);
            }
            let requests: Vec<EvalRequest> = candidates
                .iter()
                .map(|&v| {
                    let mut c = incumbent.clone();
                    c.set(name.clone(), v);
                    EvalRequest::new(c, seed, Source::Sequential)
                })
                .collect();
            let records = ev.evaluate_batch(&requests)?;
            requested.extend(records.iter().map(|r| r.canonical_key.clone()));

            let (value, record) = choose(&candidates, &records, current)
                .ok_or_else(|| SearchError::SweepFailed(name.clone()))?;
            if value != current {
                changed = true;
                incumbent.set(name.clone(), value);
            }
            incumbent_record = record.clone();
            trajectory.push(TrajectoryStep {
                param: name.clone(),
                value,
                best_perplexity: record.test_perplexity().expect("chosen record is ok"),
            });
        }
        if !options.until_fixed_point || !changed {
            break;
        }
    }

    Ok(SearchResult {
        best_config: incumbent,
        best_record: EvaluationRecord {
            cached: false,
            ..incumbent_record
        },
        unique_evaluations: requested.len(),
        trajectory,
        exhausted: false,
    })
}

/// Lowest perplexity; ties keep the incumbent, then take the earliest candidate.
fn choose<'r>(
    candidates: &[f64],
    records: &'r [EvaluationRecord],
    incumbent: f64,
) -> Option<(f64, &'r EvaluationRecord)> {
    let mut best: Option<(f64, &EvaluationRecord, f64)> = None;
    for (&v, r) in candidates.iter().zip(records) {
        let Some(p) = r.test_perplexity() else {
            continue;
        };
        let better = match best {
            None => true,
            Some((bv, _, bp)) => p < bp || (p == bp && v == incumbent && bv != incumbent),
        };
        if better {
            best = Some((v, r, p));
        }
    }
    best.map(|(v, r, _)| (v, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::EvaluatorOptions;
    use crate::objective::{Budget, Objective, Outcome};
    use crate::space::{ConfigSpace, ParamKind, ParamSpec};

    fn grid_space() -> ConfigSpace {
        ConfigSpace::new(
            "g",
            vec![
                ParamSpec::new("a", ParamKind::Integer, vec![0.0, 1.0, 2.0], 1.0),
                ParamSpec::new("b", ParamKind::Integer, vec![0.0, 1.0, 2.0, 3.0], 0.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn constant_objective_keeps_start() {
        let space = grid_space();
        let obj = |_: &Configuration| 5.0;
        let ev = Evaluator::new(&space, &obj, EvaluatorOptions::default());
        let start = space.default_config();
        let res = sequential_search(&ev, &start, &SequentialOptions::default()).unwrap();
        assert_eq!(res.best_config, start);
        assert_eq!(res.unique_evaluations, 1 + 2 + 3);
        assert!(res.trajectory.iter().all(|s| s.best_perplexity == 5.0));
    }

    #[test]
    fn ties_prefer_lower_grid_index() {
        let space = grid_space();
        // b in {2, 3} tie at the minimum; incumbent b = 0 is worse.
        let obj = |c: &Configuration| if c.get("b").unwrap() >= 2.0 { 1.0 } else { 4.0 };
        let ev = Evaluator::new(&space, &obj, EvaluatorOptions::default());
        let res =
            sequential_search(&ev, &space.default_config(), &SequentialOptions::default()).unwrap();
        assert_eq!(res.best_config.get("b"), Some(2.0));
        assert_eq!(res.best_config.get("a"), Some(1.0));
    }

    #[test]
    fn off_grid_incumbent_is_a_candidate() {
        let space = ConfigSpace::new(
            "o",
            vec![ParamSpec::new("x", ParamKind::Real, vec![0.3, 0.4], 0.1)],
        )
        .unwrap();
        let obj = |c: &Configuration| 1.0 + c.get("x").unwrap();
        let ev = Evaluator::new(&space, &obj, EvaluatorOptions::default());
        let res =
            sequential_search(&ev, &space.default_config(), &SequentialOptions::default()).unwrap();
        assert_eq!(res.best_config.get("x"), Some(0.1));
        assert_eq!(res.unique_evaluations, 3);
    }

    #[test]
    fn trajectory_is_nonincreasing() {
        let space = grid_space();
        let obj = |c: &Configuration| {
            (c.get("a").unwrap() - 2.0).powi(2) + (c.get("b").unwrap() - 1.0).abs() + 3.0
        };
        let ev = Evaluator::new(&space, &obj, EvaluatorOptions::default());
        let res =
            sequential_search(&ev, &space.default_config(), &SequentialOptions::default()).unwrap();
        let ppl: Vec<f64> = res.trajectory.iter().map(|s| s.best_perplexity).collect();
        assert!(ppl.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(res.best_record.test_perplexity(), Some(3.0));
        assert_eq!(
            res.best_record.canonical_key,
            res.best_config.canonical_key()
        );
    }

    #[test]
    fn all_failures_abort_the_sweep() {
        struct Broken;
        impl Objective for Broken {
            fn evaluate(&self, _: &Configuration, _: u64, _: &Budget) -> Outcome {
                Outcome::error("nope")
            }
        }
        let space = grid_space();
        let ev = Evaluator::new(&space, &Broken, EvaluatorOptions::default());
        let err = sequential_search(&ev, &space.default_config(), &SequentialOptions::default())
            .unwrap_err();
        assert!(matches!(err, SearchError::SweepFailed(p) if p == "a"));
    }

    #[test]
    fn custom_order_and_fixed_point() {
        let space = grid_space();
        // Coupled: best b depends on a.
        let obj = |c: &Configuration| {
            let (a, b) = (c.get("a").unwrap(), c.get("b").unwrap());
            (a - b).abs() + (a - 2.0).abs() * 0.1
        };
        let ev = Evaluator::new(&space, &obj, EvaluatorOptions::default());
        let opts = SequentialOptions {
            order: Some(vec!["b".into(), "a".into()]),
            until_fixed_point: true,
        };
        let res = sequential_search(&ev, &space.default_config(), &opts).unwrap();
        assert_eq!(res.trajectory[0].param, "b");
        assert!(res.trajectory.len() >= 4);

        let bad = SequentialOptions {
            order: Some(vec!["zz".into()]),
            until_fixed_point: false,
        };
        assert!(sequential_search(&ev, &space.default_config(), &bad).is_err());
    }
}
