//! Cheap synthetic objectives whose optimum can be found by enumeration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use super::{Budget, Objective, Outcome};
use crate::space::{ConfigSpace, Configuration};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurrogateError {
    #[error("noise standard deviation must be non-negative, got {0}")]
    NegativeNoise(f64),
    #[error("{0}")]
    Dimension(String),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
}

/// `base + Σ_h weight_h · (index_h − target_h)² + noise`, with noise keyed by configuration.
#[derive(Debug, Clone)]
pub struct SeparableSurrogate {
    space: ConfigSpace,
    base: f64,
    weights: Vec<f64>,
    targets: Vec<usize>,
    noise_sd: f64,
    seed: u64,
}

impl SeparableSurrogate {
    pub fn new(
        space: &ConfigSpace,
        base: f64,
        weights: Vec<f64>,
        targets: Vec<usize>,
        noise_sd: f64,
        seed: u64,
    ) -> Result<Self, SurrogateError> {
        if noise_sd < 0.0 || noise_sd.is_nan() {
            return Err(SurrogateError::NegativeNoise(noise_sd));
        }
        if weights.len() != space.len() || targets.len() != space.len() {
            return Err(SurrogateError::Dimension(format!(
                "expected {} weights and targets, got {} and {}",
                space.len(),
                weights.len(),
                targets.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
            return Err(SurrogateError::Dimension(format!(
                "weights must be non-negative, got {w}"
            )));
        }
        for (p, &t) in space.params().iter().zip(&targets) {
            if t >= p.grid.len() {
                return Err(SurrogateError::Dimension(format!(
                    "{}: target index {t} outside a grid of {}",
                    p.name,
                    p.grid.len()
                )));
            }
        }
        Ok(SeparableSurrogate {
            space: space.clone(),
            base,
            weights,
            targets,
            noise_sd,
            seed,
        })
    }

    /// Unit weights and targets drawn uniformly from each grid.
    pub fn seeded(
        space: &ConfigSpace,
        base: f64,
        noise_sd: f64,
        seed: u64,
    ) -> Result<Self, SurrogateError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let targets = space
            .params()
            .iter()
            .map(|p| rng.random_range(0..p.grid.len()))
            .collect();
        Self::new(space, base, vec![1.0; space.len()], targets, noise_sd, seed)
    }

    pub fn target_config(&self) -> Configuration {
        self.space.from_indices(&self.targets)
    }

    pub fn value(&self, config: &Configuration) -> f64 {
        let penalty: f64 = self
            .space
            .params()
            .iter()
            .zip(self.weights.iter().zip(&self.targets))
            .map(|(p, (w, &t))| {
                let idx = p.nearest_index(config.get(&p.name).unwrap_or(p.default));
                let d = idx as f64 - t as f64;
                w * d * d
            })
            .sum();
        let noise = if self.noise_sd > 0.0 {
            self.noise_sd * keyed_normal(self.seed, config)
        } else {
            0.0
        };
        self.base + penalty + noise
    }
}

impl Objective for SeparableSurrogate {
    fn evaluate(&self, config: &Configuration, _seed: u64, _budget: &Budget) -> Outcome {
        Outcome::ok(self.value(config))
    }
}

/// Standard normal draw that depends only on the seed and the configuration's identity.
fn keyed_normal(seed: u64, config: &Configuration) -> f64 {
    let digest = Sha256::digest(format!("{seed}|{}", config.canonical_text()).as_bytes());
    let mut bytes = [0u8; 32];
    bytes.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(bytes).sample(StandardNormal)
}

/// A penalty table over the joint grid indices of two parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTerm {
    pub a: String,
    pub b: String,
    pub matrix: Vec<Vec<f64>>,
}

/// `base + Σ_pairs matrix[index_a][index_b]`.
#[derive(Debug, Clone)]
pub struct CoupledSurrogate {
    space: ConfigSpace,
    base: f64,
    pairs: Vec<(usize, usize, Vec<Vec<f64>>)>,
}

impl CoupledSurrogate {
    pub fn new(
        space: &ConfigSpace,
        base: f64,
        pairs: Vec<PairTerm>,
    ) -> Result<Self, SurrogateError> {
        let mut resolved = Vec::with_capacity(pairs.len());
        for term in pairs {
            let ia = space
                .position(&term.a)
                .ok_or_else(|| SurrogateError::UnknownParam(term.a.clone()))?;
            let ib = space
                .position(&term.b)
                .ok_or_else(|| SurrogateError::UnknownParam(term.b.clone()))?;
            let (na, nb) = (space.params()[ia].grid.len(), space.params()[ib].grid.len());
            if term.matrix.len() != na || term.matrix.iter().any(|row| row.len() != nb) {
                return Err(SurrogateError::Dimension(format!(
                    "pair ({}, {}) needs a {na}x{nb} matrix",
                    term.a, term.b
                )));
            }
            resolved.push((ia, ib, term.matrix));
        }
        Ok(CoupledSurrogate {
            space: space.clone(),
            base,
            pairs: resolved,
        })
    }

    /// Couples each parameter with the next one in space order using uniform `[0, scale)` tables.
    pub fn chain(
        space: &ConfigSpace,
        base: f64,
        scale: f64,
        seed: u64,
    ) -> Result<Self, SurrogateError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = space.params();
        let pairs = params
            .windows(2)
            .map(|w| PairTerm {
                a: w[0].name.clone(),
                b: w[1].name.clone(),
                matrix: (0..w[0].grid.len())
                    .map(|_| {
                        (0..w[1].grid.len())
                            .map(|_| scale * rng.random::<f64>())
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        Self::new(space, base, pairs)
    }

    pub fn value(&self, config: &Configuration) -> f64 {
        let params = self.space.params();
        let index = |i: usize| {
            let p = &params[i];
            p.nearest_index(config.get(&p.name).unwrap_or(p.default))
        };
        self.base
            + self
                .pairs
                .iter()
                .map(|(a, b, m)| m[index(*a)][index(*b)])
                .sum::<f64>()
    }
}

impl Objective for CoupledSurrogate {
    fn evaluate(&self, config: &Configuration, _seed: u64, _budget: &Budget) -> Outcome {
        Outcome::ok(self.value(config))
    }
}
