//! Runs objectives with deduplication, bounded parallelism, and journaling.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, RwLock};
use std::thread;
use std::time::Instant;

use crate::journal::{JournalError, JournalWriter};
use crate::objective::{Budget, EvaluationRecord, Objective, Source};
use crate::space::{ConfigSpace, Configuration, SpaceError};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Journal(#[from] JournalError),
    #[error("run interrupted after {0} fresh evaluations")]
    Interrupted(usize),
}

/// One configuration to evaluate, tagged with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRequest {
    pub config: Configuration,
    pub seed: u64,
    pub source: Source,
    pub generation: Option<u32>,
}

impl EvalRequest {
    pub fn new(config: Configuration, seed: u64, source: Source) -> Self {
        EvalRequest {
            config,
            seed,
            source,
            generation: None,
        }
    }

    pub fn in_generation(mut self, generation: u32) -> Self {
        self.generation = Some(generation);
        self
    }
}

#[derive(Debug, Clone)]
pub struct EvaluatorOptions {
    pub budget: Budget,
    /// Seed forwarded with every evaluation request issued by a search.
    pub eval_seed: u64,
    /// Maximum concurrent objective invocations.
    pub parallelism: usize,
    pub caching: bool,
    /// Write `wall_seconds = 0` so journals compare byte for byte.
    pub deterministic: bool,
    /// Stop with [`EvalError::Interrupted`] once this many fresh evaluations are journaled.
    pub stop_after: Option<usize>,
}

impl Default for EvaluatorOptions {
    fn default() -> Self {
        EvaluatorOptions {
            budget: Budget::default(),
            eval_seed: 0,
            parallelism: 1,
            caching: true,
            deterministic: false,
            stop_after: None,
        }
    }
}

type CacheKey = (String, u64);

/// Front end through which searches evaluate configurations.
///
/// Records are journaled in request order, so the journal does not depend on
/// the parallelism setting or on thread scheduling.
pub struct Evaluator<'a> {
    space: &'a ConfigSpace,
    space_digest: String,
    objective: &'a dyn Objective,
    options: EvaluatorOptions,
    cache: RwLock<HashMap<CacheKey, EvaluationRecord>>,
    journal: Option<Mutex<JournalWriter>>,
    invocations: AtomicUsize,
    fresh: AtomicUsize,
    requested: Mutex<HashSet<CacheKey>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        space: &'a ConfigSpace,
        objective: &'a dyn Objective,
        options: EvaluatorOptions,
    ) -> Self {
        Evaluator {
            space,
            space_digest: space.digest(),
            objective,
            options,
            cache: RwLock::new(HashMap::new()),
            journal: None,
            invocations: AtomicUsize::new(0),
            fresh: AtomicUsize::new(0),
            requested: Mutex::new(HashSet::new()),
        }
    }

    pub fn with_journal(mut self, journal: JournalWriter) -> Self {
        self.journal = Some(Mutex::new(journal));
        self
    }

    /// Seeds the cache, typically from a journal being resumed.
    pub fn with_cache(self, records: impl IntoIterator<Item = EvaluationRecord>) -> Self {
        {
            let mut cache = self.cache.write().unwrap();
            for r in records {
                cache.insert((r.canonical_key.clone(), r.seed), r);
            }
        }
        self
    }

    pub fn space(&self) -> &ConfigSpace {
        self.space
    }

    pub fn options(&self) -> &EvaluatorOptions {
        &self.options
    }

    /// Calls made to the underlying objective.
    pub fn invocations(&self) -> usize {
        self.invocations.load(Ordering::SeqCst)
    }

    /// Distinct `(configuration, seed)` pairs requested so far, cached or not.
    pub fn unique_requested(&self) -> usize {
        self.requested.lock().unwrap().len()
    }

    pub fn was_requested(&self, config: &Configuration, seed: u64) -> bool {
        self.requested
            .lock()
            .unwrap()
            .contains(&(config.canonical_key(), seed))
    }

    pub fn into_journal(self) -> Option<JournalWriter> {
        self.journal.map(|m| m.into_inner().unwrap())
    }

    pub fn evaluate(&self, request: EvalRequest) -> Result<EvaluationRecord, EvalError> {
        Ok(self
            .evaluate_batch(std::slice::from_ref(&request))?
            .remove(0))
    }

    /// Evaluates a batch, returning one record per request in request order.
    pub fn evaluate_batch(
        &self,
        requests: &[EvalRequest],
    ) -> Result<Vec<EvaluationRecord>, EvalError> {
        let mut keys = Vec::with_capacity(requests.len());
        for r in requests {
            keys.push((self.space.canonical_key(&r.config)?, r.seed));
        }

        enum Slot {
            Cached(EvaluationRecord),
            Fresh(usize),
        }
        let mut slots = Vec::with_capacity(requests.len());
        let mut pending: Vec<usize> = Vec::new();
        let mut first_in_batch: HashMap<&CacheKey, usize> = HashMap::new();
        {
            let cache = self.cache.read().unwrap();
            for (i, key) in keys.iter().enumerate() {
                if self.options.caching {
                    if let Some(hit) = cache.get(key) {
                        slots.push(Slot::Cached(EvaluationRecord {
                            cached: true,
                            ..hit.clone()
                        }));
                        continue;
                    }
                    if let Some(&j) = first_in_batch.get(key) {
                        slots.push(Slot::Fresh(j));
                        continue;
                    }
                    first_in_batch.insert(key, pending.len());
                }
                slots.push(Slot::Fresh(pending.len()));
                pending.push(i);
            }
        }

        let mut interrupted = false;
        if let Some(limit) = self.options.stop_after {
            let allowed = limit.saturating_sub(self.fresh.load(Ordering::SeqCst));
            if pending.len() > allowed {
                pending.truncate(allowed);
                interrupted = true;
            }
        }

        let fresh = self.run_parallel(requests, &keys, &pending);

        for record in &fresh {
            if let Some(journal) = &self.journal {
                journal.lock().unwrap().append(&self.space_digest, record)?;
            }
            if self.options.caching {
                self.cache
                    .write()
                    .unwrap()
                    .insert((record.canonical_key.clone(), record.seed), record.clone());
            }
            self.fresh.fetch_add(1, Ordering::SeqCst);
        }
        if interrupted {
            return Err(EvalError::Interrupted(self.fresh.load(Ordering::SeqCst)));
        }

        self.requested.lock().unwrap().extend(keys);
        let mut out = Vec::with_capacity(requests.len());
        let mut served = vec![false; fresh.len()];
        for slot in slots {
            match slot {
                Slot::Cached(r) => out.push(r),
                Slot::Fresh(j) => {
                    let mut r = fresh[j].clone();
                    r.cached = std::mem::replace(&mut served[j], true);
                    out.push(r);
                }
            }
        }
        Ok(out)
    }

    fn run_parallel(
        &self,
        requests: &[EvalRequest],
        keys: &[CacheKey],
        pending: &[usize],
    ) -> Vec<EvaluationRecord> {
        let workers = self.options.parallelism.max(1).min(pending.len());
        if workers <= 1 {
            return pending
                .iter()
                .map(|&i| self.invoke(&requests[i], &keys[i].0))
                .collect();
        }
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<EvaluationRecord>>> = Mutex::new(vec![None; pending.len()]);
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let j = next.fetch_add(1, Ordering::SeqCst);
                    let Some(&i) = pending.get(j) else { break };
                    let rec = self.invoke(&requests[i], &keys[i].0);
                    results.lock().unwrap()[j] = Some(rec);
                });
            }
        });
        results
            .into_inner()
            .unwrap()
            .into_iter()
            .map(|r| r.expect("every slot filled"))
            .collect()
    }

    fn invoke(&self, request: &EvalRequest, key: &str) -> EvaluationRecord {
        let start = Instant::now();
        let outcome = self
            .objective
            .evaluate(&request.config, request.seed, &self.options.budget)
            .checked();
        self.invocations.fetch_add(1, Ordering::SeqCst);
        let wall_seconds = if self.options.deterministic {
            0.0
        } else {
            start.elapsed().as_secs_f64()
        };
        EvaluationRecord {
            config: request.config.clone(),
            canonical_key: key.to_string(),
            seed: request.seed,
            metrics: outcome.metrics,
            status: outcome.status,
            source: request.source,
            generation: request.generation,
            wall_seconds,
            message: outcome.message,
            cached: false,
        }
    }
}
