//! Population search with roulette-wheel selection, single-point crossover,
//! and grid-step mutation.
//!
//! Selection follows `p_j = f_j / Σ_k f_k` over the `B` individuals of a
//! generation, where the fitness `f_j` is a decreasing function of the test
//! perplexity chosen by [`FitnessScheme`].

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmin, SearchError, SearchResult};
use crate::evaluator::{EvalRequest, Evaluator};
use crate::objective::{EvaluationRecord, Source};
use crate::space::{ConfigSpace, Configuration, SpaceError};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GaError {
    #[error("fitness needs at least one perplexity")]
    Empty,
    #[error("perplexities must be finite and positive")]
    BadPerplexity,
    #[error("fitness values must be finite, non-negative, and not all zero")]
    BadFitness,
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FitnessScheme {
    /// `f = 1 / P`.
    #[default]
    Inverse,
    /// `f = (P_max − P) + 0.01 · (P_max − P_min)`; all-equal input maps to ones.
    Window,
    /// `f = n − rank`, best rank 0; tied perplexities share the better rank.
    Rank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Seed configuration plus mutated copies of it.
    #[default]
    Neighborhood,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaParams {
    pub population_size: usize,
    pub generations: usize,
    pub p_mut: f64,
    pub fitness_scheme: FitnessScheme,
    pub elitism: usize,
    pub init_mode: InitMode,
    /// Per-gene mutation rate used to spread the initial neighborhood.
    pub p_init: f64,
    /// Cap on distinct configurations evaluated; `None` means `B · G`.
    pub budget: Option<usize>,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population_size: 12,
            generations: 7,
            p_mut: 0.2,
            fitness_scheme: FitnessScheme::Inverse,
            elitism: 0,
            init_mode: InitMode::Neighborhood,
            p_init: 0.5,
            budget: Some(84),
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidParams(m.to_string()));
        if self.population_size < 2 {
            return bad("population size must be at least 2");
        }
        if self.generations < 1 {
            return bad("generations must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.p_mut) || !(0.0..=1.0).contains(&self.p_init) {
            return bad("mutation rates must lie in [0, 1]");
        }
        if self.elitism >= self.population_size {
            return bad("elitism must be smaller than the population size");
        }
        if self.budget == Some(0) {
            return bad("budget must be at least 1");
        }
        Ok(())
    }
}

pub fn fitness<T: Scalar>(perplexities: &[T], scheme: FitnessScheme) -> Result<Vec<T>, GaError> {
    if perplexities.is_empty() {
        return Err(GaError::Empty);
    }
    if perplexities
        .iter()
        .any(|p| !p.is_finite() || *p <= T::zero())
    {
        return Err(GaError::BadPerplexity);
    }
    let n = perplexities.len();
    Ok(match scheme {
        FitnessScheme::Inverse => perplexities.iter().map(|&p| p.recip()).collect(),
        FitnessScheme::Window => {
            let max = perplexities.iter().copied().fold(T::neg_infinity(), T::max);
            let min = perplexities.iter().copied().fold(T::infinity(), T::min);
            if max == min {
                vec![T::one(); n]
            } else {
                let floor = T::from_f64(0.01).unwrap() * (max - min);
                perplexities.iter().map(|&p| (max - p) + floor).collect()
            }
        }
        FitnessScheme::Rank => perplexities
            .iter()
            .map(|&p| {
                let rank = perplexities.iter().filter(|&&q| q < p).count();
                T::from_usize(n - rank).unwrap()
            })
            .collect(),
    })
}

fn check_fitness<T: Scalar>(fitness: &[T]) -> Result<T, GaError> {
    if fitness.iter().any(|f| !f.is_finite() || *f < T::zero()) {
        return Err(GaError::BadFitness);
    }
    let total = fitness.iter().fold(T::zero(), |a, &b| a + b);
    if !total.is_finite() || total <= T::zero() {
        return Err(GaError::BadFitness);
    }
    Ok(total)
}

/// Selection probabilities `f_j / Σ f`.
pub fn selection_probabilities<T: Scalar>(fitness: &[T]) -> Result<Vec<T>, GaError> {
    let total = check_fitness(fitness)?;
    Ok(fitness.iter().map(|&f| f / total).collect())
}

/// Roulette-wheel draw: inverts the cumulative selection distribution at one uniform variate.
pub fn roulette_select<T: Scalar, R: Rng + ?Sized>(
    fitness: &[T],
    rng: &mut R,
) -> Result<usize, GaError> {
    let total = check_fitness(fitness)?;
    let u = T::from_f64(rng.random::<f64>()).unwrap();
    let mut cumulative = T::zero();
    let mut last_positive = 0;
    for (j, &f) in fitness.iter().enumerate() {
        if f > T::zero() {
            last_positive = j;
        }
        cumulative = cumulative + f / total;
        if u < cumulative {
            return Ok(j);
        }
    }
    Ok(last_positive)
}

/// Takes genes `[0, cut)` from one parent and `[cut, L)` from the other.
pub fn crossover_at(
    space: &ConfigSpace,
    a: &Configuration,
    b: &Configuration,
    cut: usize,
    first_child: bool,
) -> Result<Configuration, GaError> {
    space.validate(a)?;
    space.validate(b)?;
    let (head, tail) = if first_child { (a, b) } else { (b, a) };
    Ok(space
        .params()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let parent = if i < cut { head } else { tail };
            (p.name.clone(), parent.get(&p.name).expect("validated"))
        })
        .collect())
}

fn draw_cut<R: Rng + ?Sized>(len: usize, rng: &mut R) -> usize {
    if len < 2 {
        len
    } else {
        rng.random_range(1..len)
    }
}

/// Single-point crossover returning one of the two children uniformly at random.
pub fn crossover<R: Rng + ?Sized>(
    space: &ConfigSpace,
    a: &Configuration,
    b: &Configuration,
    rng: &mut R,
) -> Result<Configuration, GaError> {
    let cut = draw_cut(space.len(), rng);
    let first = rng.random::<bool>();
    crossover_at(space, a, b, cut, first)
}

/// Moves each gene, with probability `p_mut`, one grid step up or down.
pub fn mutate<R: Rng + ?Sized>(
    space: &ConfigSpace,
    config: &Configuration,
    p_mut: f64,
    rng: &mut R,
) -> Configuration {
    let mut out = config.clone();
    for p in space.params() {
        if rng.random::<f64>() < p_mut {
            let step = if rng.random::<bool>() { 1 } else { -1 };
            out = space
                .neighbor(&out, &p.name, step)
                .expect("parameter exists");
        }
    }
    out
}

pub fn init_population<R: Rng + ?Sized>(
    space: &ConfigSpace,
    seed_config: &Configuration,
    size: usize,
    mode: InitMode,
    p_init: f64,
    rng: &mut R,
) -> Vec<Configuration> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(size);
    if mode == InitMode::Neighborhood && size > 0 {
        seen.insert(seed_config.canonical_key());
        out.push(seed_config.clone());
    }
    while out.len() < size {
        let mut attempts = 0;
        let candidate = loop {
            let c = match mode {
                InitMode::Neighborhood => mutate(space, seed_config, p_init, rng),
                InitMode::Uniform => space.random_config(rng),
            };
            attempts += 1;
            if !seen.contains(&c.canonical_key()) || attempts >= 100 {
                break c;
            }
        };
        seen.insert(candidate.canonical_key());
        out.push(candidate);
    }
    out
}

/// One evaluated generation.
#[derive(Debug, Clone)]
pub struct Generation {
    pub index: u32,
    pub individuals: Vec<(Configuration, EvaluationRecord)>,
    pub fitness: Vec<f64>,
    pub selection_prob: Vec<f64>,
    /// Lowest perplexity over every evaluation up to and including this generation.
    pub best_so_far: f64,
    /// The evaluation budget ran out part way through this generation.
    pub partial: bool,
}

#[derive(Debug, Clone)]
pub struct GaResult {
    pub search: SearchResult,
    pub generations: Vec<Generation>,
}

impl GaResult {
    pub fn best_so_far(&self) -> Vec<f64> {
        self.generations.iter().map(|g| g.best_so_far).collect()
    }
}

/// Independent random streams so that no stochastic choice depends on another's consumption.
struct Streams {
    init: ChaCha8Rng,
    selection: ChaCha8Rng,
    cut: ChaCha8Rng,
    pick: ChaCha8Rng,
    mutation: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        Streams {
            init: stream(1),
            selection: stream(2),
            cut: stream(3),
            pick: stream(4),
            mutation: stream(5),
        }
    }
}

/// Fitness for a generation; failed individuals get the generation's worst fitness.
fn generation_fitness(records: &[EvaluationRecord], scheme: FitnessScheme) -> Option<Vec<f64>> {
    let ok: Vec<f64> = records.iter().filter_map(|r| r.test_perplexity()).collect();
    if ok.is_empty() {
        return None;
    }
    let f = fitness(&ok, scheme).expect("perplexities validated by the evaluator");
    let worst = f.iter().copied().fold(f64::INFINITY, f64::min);
    let mut it = f.into_iter();
    Some(
        records
            .iter()
            .map(|r| if r.is_ok() { it.next().unwrap() } else { worst })
            .collect(),
    )
}

pub fn ga_search(
    ev: &Evaluator<'_>,
    params: &GaParams,
    seed_config: &Configuration,
    seed: u64,
) -> Result<GaResult, SearchError> {
    params.validate()?;
    let space = ev.space();
    space.validate(seed_config)?;
    let eval_seed = ev.options().eval_seed;
    let budget = params
        .budget
        .unwrap_or(params.population_size * params.generations);
    let mut rngs = Streams::new(seed);

    let mut population = init_population(
        space,
        seed_config,
        params.population_size,
        params.init_mode,
        params.p_init,
        &mut rngs.init,
    );
    let mut requested: HashSet<String> = HashSet::new();
    let mut all_records: Vec<EvaluationRecord> = Vec::new();
    let mut generations = Vec::new();

    for g in 0..params.generations {
        let index = g as u32;
        // Admit individuals until the distinct-evaluation budget is spent.
        let mut admitted = Vec::with_capacity(population.len());
        let mut partial = false;
        let mut new_keys = HashSet::new();
        for c in &population {
            let key = c.canonical_key();
            if requested.contains(&key) || new_keys.contains(&key) {
                admitted.push(c.clone());
            } else if requested.len() + new_keys.len() < budget {
                new_keys.insert(key);
                admitted.push(c.clone());
            } else {
                partial = true;
            }
        }
        let requests: Vec<EvalRequest> = admitted
            .iter()
            .map(|c| EvalRequest::new(c.clone(), eval_seed, Source::Ga).in_generation(index))
            .collect();
        let records = ev.evaluate_batch(&requests)?;
        requested.extend(new_keys);
        all_records.extend(records.iter().cloned());

        if records.is_empty() {
            break;
        }
        let fit = generation_fitness(&records, params.fitness_scheme)
            .ok_or(SearchError::GenerationFailed(index))?;
        let probs = selection_probabilities(&fit).expect("fitness is positive");
        let best_so_far = argmin(&all_records)
            .and_then(|r| r.test_perplexity())
            .expect("generation has an ok record");
        generations.push(Generation {
            index,
            individuals: admitted
                .iter()
                .cloned()
                .zip(records.iter().cloned())
                .collect(),
            fitness: fit.clone(),
            selection_prob: probs,
            best_so_far,
            partial,
        });
        if partial || g + 1 == params.generations || requested.len() >= budget {
            break;
        }

        let mut next = Vec::with_capacity(params.population_size);
        if params.elitism > 0 {
            let mut order: Vec<usize> =
                (0..records.len()).filter(|&i| records[i].is_ok()).collect();
            order.sort_by(|&i, &j| {
                let (pi, pj) = (
                    records[i].test_perplexity().unwrap(),
                    records[j].test_perplexity().unwrap(),
                );
                pi.total_cmp(&pj).then(i.cmp(&j))
            });
            next.extend(
                order
                    .into_iter()
                    .take(params.elitism)
                    .map(|i| admitted[i].clone()),
            );
        }
        while next.len() < params.population_size {
            let a = roulette_select(&fit, &mut rngs.selection).expect("fitness is positive");
            let mut b = roulette_select(&fit, &mut rngs.selection).expect("fitness is positive");
            if b == a {
                b = roulette_select(&fit, &mut rngs.selection).expect("fitness is positive");
            }
            let cut = draw_cut(space.len(), &mut rngs.cut);
            let first = rngs.pick.random::<bool>();
            let child = crossover_at(space, &admitted[a], &admitted[b], cut, first)
                .expect("parents are valid");
            next.push(mutate(space, &child, params.p_mut, &mut rngs.mutation));
        }
        population = next;
    }

    let best = argmin(&all_records).ok_or(SearchError::NoSuccess)?.clone();
    Ok(GaResult {
        search: SearchResult {
            best_config: best.config.clone(),
            best_record: EvaluationRecord {
                cached: false,
                ..best
            },
            unique_evaluations: requested.len(),
            trajectory: Vec::new(),
            exhausted: false,
        },
        generations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::EvaluatorOptions;
    use crate::space::{ParamKind, ParamSpec};
    use proptest::prelude::*;

    fn abc() -> ConfigSpace {
        let g = vec![1.0, 2.0, 3.0, 4.0];
        ConfigSpace::new(
            "abc",
            vec![
                ParamSpec::new("x", ParamKind::Integer, g.clone(), 1.0),
                ParamSpec::new("y", ParamKind::Integer, g.clone(), 2.0),
                ParamSpec::new("z", ParamKind::Integer, g, 3.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn fitness_schemes() {
        assert_eq!(
            fitness(&[100.0, 200.0, 400.0], FitnessScheme::Inverse).unwrap(),
            vec![0.01, 0.005, 0.0025]
        );
        assert_eq!(
            fitness(&[10.0, 30.0], FitnessScheme::Window).unwrap(),
            vec![20.2, 0.2]
        );
        assert_eq!(
            fitness(&[5.0, 5.0], FitnessScheme::Window).unwrap(),
            vec![1.0, 1.0]
        );
        assert_eq!(
            fitness(&[3.0, 1.0, 3.0, 2.0], FitnessScheme::Rank).unwrap(),
            vec![2.0, 4.0, 2.0, 3.0]
        );
        for scheme in [
            FitnessScheme::Inverse,
            FitnessScheme::Window,
            FitnessScheme::Rank,
        ] {
            let f = fitness(&[7.0f32; 4], scheme).unwrap();
            let p = selection_probabilities(&f).unwrap();
            assert!(p.iter().all(|&x| (x - 0.25).abs() < 1e-7));
        }
        assert_eq!(
            fitness::<f64>(&[], FitnessScheme::Inverse),
            Err(GaError::Empty)
        );
        assert_eq!(
            fitness(&[1.0, 0.0], FitnessScheme::Inverse),
            Err(GaError::BadPerplexity)
        );
        assert_eq!(
            fitness(&[1.0, f64::NAN], FitnessScheme::Rank),
            Err(GaError::BadPerplexity)
        );
    }

    #[test]
    fn roulette_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert_eq!(roulette_select(&[0.0, 0.0, 5.0], &mut rng).unwrap(), 2);
        }
        assert_eq!(
            roulette_select(&[0.0, 0.0], &mut rng),
            Err(GaError::BadFitness)
        );
        assert_eq!(
            roulette_select(&[1.0, -1.0, 3.0], &mut rng),
            Err(GaError::BadFitness)
        );
    }

    #[test]
    fn roulette_frequencies_one_to_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| roulette_select(&[1.0, 3.0], &mut rng).unwrap() == 0)
            .count();
        assert!((hits as f64 / draws as f64 - 0.25).abs() <= 0.01);
    }

    #[test]
    fn crossover_definition() {
        let space = abc();
        let a = space.from_indices(&[0, 0, 0]);
        let b = space.from_indices(&[3, 3, 3]);
        assert_eq!(
            crossover_at(&space, &a, &b, 1, true).unwrap(),
            space.from_indices(&[0, 3, 3])
        );
        assert_eq!(
            crossover_at(&space, &a, &b, 1, false).unwrap(),
            space.from_indices(&[3, 0, 0])
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            assert_eq!(crossover(&space, &a, &a, &mut rng).unwrap(), a);
        }
        let foreign: Configuration = [("q", 1.0)].into_iter().collect();
        assert!(crossover(&space, &a, &foreign, &mut rng).is_err());
    }

    #[test]
    fn mutation_rates() {
        let space = ConfigSpace::awd_lstm();
        let d = space.default_config();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        assert_eq!(mutate(&space, &d, 0.0, &mut rng), d);
        let snapped = space.snap(&d).unwrap();
        for _ in 0..20 {
            let m = mutate(&space, &d, 1.0, &mut rng);
            for p in space.params() {
                let before = p.index_of(snapped.get(&p.name).unwrap()).unwrap() as i64;
                let after = p.index_of(m.get(&p.name).unwrap()).unwrap() as i64;
                assert_eq!((before - after).abs(), 1, "{}", p.name);
            }
        }
        let edge = space.from_indices(&[0; 11]);
        let m = mutate(&space, &edge, 1.0, &mut rng);
        assert_eq!(space.indices(&m).unwrap(), vec![1; 11]);
    }

    #[test]
    fn init_population_modes() {
        let space = ConfigSpace::awd_lstm();
        let d = space.default_config();
        let pop = init_population(
            &space,
            &d,
            12,
            InitMode::Neighborhood,
            0.5,
            &mut ChaCha8Rng::seed_from_u64(1),
        );
        assert_eq!(pop.len(), 12);
        assert_eq!(pop[0], d);
        let keys: HashSet<_> = pop.iter().map(|c| c.canonical_key()).collect();
        assert_eq!(keys.len(), 12);

        let same = init_population(
            &space,
            &d,
            2,
            InitMode::Neighborhood,
            0.0,
            &mut ChaCha8Rng::seed_from_u64(1),
        );
        assert_eq!(same, vec![d.clone(), d.clone()]);

        let u1 = init_population(
            &space,
            &d,
            6,
            InitMode::Uniform,
            0.5,
            &mut ChaCha8Rng::seed_from_u64(4),
        );
        let u2 = init_population(
            &space,
            &d,
            6,
            InitMode::Uniform,
            0.5,
            &mut ChaCha8Rng::seed_from_u64(4),
        );
        assert_eq!(u1, u2);
    }

    fn injective(c: &Configuration) -> f64 {
        // Distinct value per configuration of the AWD-LSTM grid.
        let space = ConfigSpace::awd_lstm();
        let idx = space.indices(c).unwrap();
        1000.0 + idx.iter().fold(0.0, |acc, &i| acc * 4.0 + i as f64) / 1000.0
    }

    #[test]
    fn default_params_use_84_evaluations() {
        let space = ConfigSpace::awd_lstm();
        let ev = Evaluator::new(&space, &injective, EvaluatorOptions::default());
        let res = ga_search(&ev, &GaParams::default(), &space.default_config(), 11).unwrap();
        assert!(res.search.unique_evaluations <= 84);
        assert_eq!(res.search.unique_evaluations, ev.invocations());
        let curve = res.best_so_far();
        assert!(curve.windows(2).all(|w| w[1] <= w[0]));
        for g in &res.generations {
            assert!(g.individuals.len() <= 12);
            let total: f64 = g.selection_prob.iter().sum();
            assert!((total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn no_duplicates_gives_exactly_b_times_g() {
        let space = ConfigSpace::awd_lstm();
        let ev = Evaluator::new(&space, &injective, EvaluatorOptions::default());
        // p_mut = 1 moves every gene each generation, so children rarely repeat.
        let params = GaParams {
            p_mut: 1.0,
            ..GaParams::default()
        };
        let res = ga_search(&ev, &params, &space.default_config(), 2).unwrap();
        let total: usize = res.generations.iter().map(|g| g.individuals.len()).sum();
        let distinct: HashSet<_> = res
            .generations
            .iter()
            .flat_map(|g| g.individuals.iter().map(|(c, _)| c.canonical_key()))
            .collect();
        if distinct.len() == total {
            assert_eq!(res.search.unique_evaluations, 84);
            assert_eq!(res.generations.len(), 7);
        }
        assert!(res
            .generations
            .iter()
            .all(|g| g.partial || g.individuals.len() == 12));
    }

    #[test]
    fn gene_provenance_without_mutation() {
        let space = abc();
        let f = |c: &Configuration| {
            c.get("x").unwrap() + c.get("y").unwrap() * 2.0 + c.get("z").unwrap() * 3.0
        };
        let ev = Evaluator::new(&space, &f, EvaluatorOptions::default());
        let params = GaParams {
            p_mut: 0.0,
            init_mode: InitMode::Uniform,
            budget: None,
            generations: 4,
            population_size: 6,
            ..GaParams::default()
        };
        let res = ga_search(&ev, &params, &space.default_config(), 5).unwrap();
        for pair in res.generations.windows(2) {
            for (child, _) in &pair[1].individuals {
                for p in space.params() {
                    let v = child.get(&p.name).unwrap();
                    assert!(pair[0]
                        .individuals
                        .iter()
                        .any(|(parent, _)| parent.get(&p.name) == Some(v)));
                }
            }
        }
    }

    #[test]
    fn failed_individuals_get_worst_fitness() {
        let mk = |status, p: f64| EvaluationRecord {
            config: Configuration::new(),
            canonical_key: String::new(),
            seed: 0,
            metrics: [(crate::objective::TEST_PERPLEXITY.to_string(), p)]
                .into_iter()
                .collect(),
            status,
            source: Source::Ga,
            generation: None,
            wall_seconds: 0.0,
            message: None,
            cached: false,
        };
        use crate::objective::Status;
        let recs = vec![
            mk(Status::Ok, 10.0),
            mk(Status::Error, 0.0),
            mk(Status::Ok, 20.0),
        ];
        assert_eq!(
            generation_fitness(&recs, FitnessScheme::Inverse).unwrap(),
            vec![0.1, 0.05, 0.05]
        );
        assert!(generation_fitness(&[mk(Status::Error, 0.0)], FitnessScheme::Inverse).is_none());
    }

    #[test]
    fn invalid_params_are_rejected() {
        for p in [
            GaParams {
                population_size: 1,
                ..Default::default()
            },
            GaParams {
                generations: 0,
                ..Default::default()
            },
            GaParams {
                p_mut: 1.5,
                ..Default::default()
            },
            GaParams {
                elitism: 12,
                ..Default::default()
            },
        ] {
            assert!(p.validate().is_err());
        }
    }

    proptest! {
        #[test]
        fn selection_is_scale_invariant(f in proptest::collection::vec(0.0f64..10.0, 1..8), scale in 0.01f64..100.0, seed: u64) {
            prop_assume!(f.iter().sum::<f64>() > 0.0);
            let scaled: Vec<f64> = f.iter().map(|x| x * scale).collect();
            let p = selection_probabilities(&f).unwrap();
            let q = selection_probabilities(&scaled).unwrap();
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let mut r1 = ChaCha8Rng::seed_from_u64(seed);
            let mut r2 = ChaCha8Rng::seed_from_u64(seed);
            let same = (0..50).filter(|_| roulette_select(&f, &mut r1).unwrap() == roulette_select(&scaled, &mut r2).unwrap()).count();
            prop_assert!(same >= 48);
        }

        #[test]
        fn probabilities_sum_to_one(p in proptest::collection::vec(1.0f64..1000.0, 1..20)) {
            for scheme in [FitnessScheme::Inverse, FitnessScheme::Window, FitnessScheme::Rank] {
                let f = fitness(&p, scheme).unwrap();
                let probs = selection_probabilities(&f).unwrap();
                prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                for i in 0..p.len() {
                    for j in 0..p.len() {
                        if p[i] < p[j] { prop_assert!(f[i] > f[j]); }
                        if p[i] == p[j] { prop_assert!(f[i] == f[j]); }
                    }
                }
            }
        }

        #[test]
        fn crossover_genes_come_from_parents(a in proptest::collection::vec(0usize..4, 3), b in proptest::collection::vec(0usize..4, 3), seed: u64) {
            let space = abc();
            let (ca, cb) = (space.from_indices(&a), space.from_indices(&b));
            let child = crossover(&space, &ca, &cb, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            for p in space.params() {
                let v = child.get(&p.name);
                prop_assert!(v == ca.get(&p.name) || v == cb.get(&p.name));
            }
        }
    }
}
