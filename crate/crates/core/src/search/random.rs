use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{argmin, SearchError, SearchResult};
use crate::evaluator::{EvalRequest, Evaluator};
use crate::objective::{EvaluationRecord, Source};

/// Uniform random search over `n` distinct configurations.
///
/// When `n` reaches the size of the space every configuration is evaluated
/// and the result is flagged as exhausted if `n` asked for more.
pub fn random_search(ev: &Evaluator<'_>, n: usize, seed: u64) -> Result<SearchResult, SearchError> {
    if n == 0 {
        return Err(SearchError::InvalidParams(
            "random search needs n >= 1".into(),
        ));
    }
    let space = ev.space();
    let eval_seed = ev.options().eval_seed;
    let size = space.size();

    let configs = if n as u128 >= size {
        space.enumerate().collect::<Vec<_>>()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = HashSet::with_capacity(n);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let c = space.random_config(&mut rng);
            if seen.insert(c.canonical_key()) {
                out.push(c);
            }
        }
        out
    };
    let exhausted = n as u128 > size;

    let chunk = ev.options().parallelism.max(1);
    let mut records: Vec<EvaluationRecord> = Vec::with_capacity(configs.len());
    for batch in configs.chunks(chunk) {
        let requests: Vec<EvalRequest> = batch
            .iter()
            .map(|c| EvalRequest::new(c.clone(), eval_seed, Source::Random))
            .collect();
        records.extend(ev.evaluate_batch(&requests)?);
    }

    let best = argmin(&records).ok_or(SearchError::NoSuccess)?.clone();
    Ok(SearchResult {
        best_config: best.config.clone(),
        best_record: EvaluationRecord {
            cached: false,
            ..best
        },
        unique_evaluations: configs.len(),
        trajectory: Vec::new(),
        exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::EvaluatorOptions;
    use crate::space::{ConfigSpace, Configuration, ParamKind, ParamSpec};

    fn six() -> ConfigSpace {
        ConfigSpace::new(
            "six",
            vec![
                ParamSpec::new("a", ParamKind::Integer, vec![0.0, 1.0], 0.0),
                ParamSpec::new("b", ParamKind::Integer, vec![0.0, 1.0, 2.0], 0.0),
            ],
        )
        .unwrap()
    }

    fn obj(c: &Configuration) -> f64 {
        10.0 - c.get("a").unwrap() - c.get("b").unwrap()
    }

    #[test]
    fn exhausts_small_space() {
        let space = six();
        let ev = Evaluator::new(&space, &obj, EvaluatorOptions::default());
        let res = random_search(&ev, 10, 1).unwrap();
        assert_eq!(res.unique_evaluations, 6);
        assert_eq!(ev.invocations(), 6);
        assert!(res.exhausted);
        assert_eq!(res.best_record.test_perplexity(), Some(7.0));
    }

    #[test]
    fn single_draw_is_the_best() {
        let space = six();
        let ev = Evaluator::new(&space, &obj, EvaluatorOptions::default());
        let res = random_search(&ev, 1, 3).unwrap();
        assert_eq!(res.unique_evaluations, 1);
        assert_eq!(
            Some(obj(&res.best_config)),
            res.best_record.test_perplexity()
        );
        assert!(random_search(&ev, 0, 3).is_err());
    }

    #[test]
    fn awd_lstm_budget_of_84() {
        let space = ConfigSpace::awd_lstm();
        let f = |c: &Configuration| c.get("emsize").unwrap() / 10.0;
        let ev = Evaluator::new(&space, &f, EvaluatorOptions::default());
        let res = random_search(&ev, 84, 5).unwrap();
        assert_eq!(res.unique_evaluations, 84);
        assert_eq!(ev.invocations(), 84);
        assert!(!res.exhausted);
    }
}
