//! Discrete hyperparameter grids, configurations, and their canonical identity.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Enumeration size above which [`ConfigSpace::materialize`] refuses to run.
pub const DEFAULT_GUARD_LIMIT: u64 = 10_000_000;

/// The eleven-parameter AWD-LSTM grid with its published defaults.
pub const AWD_LSTM_SPACE: &str = include_str!("../spaces/awd_lstm.json");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpaceError {
    #[error("malformed space document: {0}")]
    Malformed(String),
    #[error("{}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("space has {size} configurations, above the guard limit of {limit}")]
    GuardLimit { size: u128, limit: u64 },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// One structural problem found while validating a space document.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptySpace,
    DuplicateParam(String),
    EmptyGrid(String),
    DuplicateGridValue { param: String, value: f64 },
    NonIncreasingGrid { param: String },
    KindMismatch { param: String, value: f64 },
    NonFinite { param: String },
    EmptyName,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptySpace => write!(f, "empty space"),
            Violation::DuplicateParam(p) => write!(f, "duplicate parameter name `{p}`"),
            Violation::EmptyGrid(p) => write!(f, "{p}: empty grid"),
            Violation::DuplicateGridValue { param, value } => {
                write!(f, "{param}: duplicate grid value {}", format_value(*value))
            }
            Violation::NonIncreasingGrid { param } => {
                write!(f, "{param}: grid is not strictly increasing")
            }
            Violation::KindMismatch { param, value } => {
                write!(
                    f,
                    "{param}: value {} does not match kind integer",
                    format_value(*value)
                )
            }
            Violation::NonFinite { param } => write!(f, "{param}: non-finite value"),
            Violation::EmptyName => write!(f, "parameter with empty name"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Integer,
    Real,
}

impl ParamKind {
    fn admits(self, v: f64) -> bool {
        v.is_finite() && (self == ParamKind::Real || v.fract() == 0.0)
    }
}

/// One hyperparameter: its ordered candidate grid and its default value.
///
/// The default need not lie on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub name: String,
    pub kind: ParamKind,
    pub grid: Vec<f64>,
    pub default: f64,
}

impl ParamSpec {
    pub fn new(name: impl Into<String>, kind: ParamKind, grid: Vec<f64>, default: f64) -> Self {
        ParamSpec {
            name: name.into(),
            kind,
            grid,
            default,
        }
    }

    /// Position of `value` on the grid, if it is exactly a grid value.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.grid.iter().position(|&g| g == value)
    }

    /// Index of the grid value closest to `value`; ties resolve to the lower index.
    pub fn nearest_index(&self, value: f64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, &g) in self.grid.iter().enumerate() {
            let d = (g - value).abs();
            if d < best_dist {
                best = i;
                best_dist = d;
            }
        }
        best
    }

    pub fn default_on_grid(&self) -> bool {
        self.index_of(self.default).is_some()
    }

    fn violations(&self, out: &mut Vec<Violation>) {
        if self.name.is_empty() {
            out.push(Violation::EmptyName);
        }
        if self.grid.is_empty() {
            out.push(Violation::EmptyGrid(self.name.clone()));
        }
        for &v in self.grid.iter().chain(std::iter::once(&self.default)) {
            if !v.is_finite() {
                out.push(Violation::NonFinite {
                    param: self.name.clone(),
                });
            } else if !self.kind.admits(v) {
                out.push(Violation::KindMismatch {
                    param: self.name.clone(),
                    value: v,
                });
            }
        }
        for w in self.grid.windows(2) {
            if w[0] == w[1] {
                out.push(Violation::DuplicateGridValue {
                    param: self.name.clone(),
                    value: w[1],
                });
            } else if w[0] > w[1] {
                out.push(Violation::NonIncreasingGrid {
                    param: self.name.clone(),
                });
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceDocument {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    guard_limit: Option<u64>,
    parameters: Vec<ParamSpec>,
}

/// An ordered collection of hyperparameters. Declaration order is the sweep order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSpace {
    name: String,
    params: Vec<ParamSpec>,
    guard_limit: u64,
    explicit_guard: bool,
}

impl ConfigSpace {
    pub fn new(name: impl Into<String>, params: Vec<ParamSpec>) -> Result<Self, SpaceError> {
        let space = ConfigSpace {
            name: name.into(),
            params,
            guard_limit: DEFAULT_GUARD_LIMIT,
            explicit_guard: false,
        };
        let violations = space.violations();
        if violations.is_empty() {
            Ok(space)
        } else {
            Err(SpaceError::Invalid(violations))
        }
    }

    /// Parses and validates a space document.
    pub fn from_json(document: &str) -> Result<Self, SpaceError> {
        let doc: SpaceDocument =
            serde_json::from_str(document).map_err(|e| SpaceError::Malformed(e.to_string()))?;
        let mut space = ConfigSpace::new(doc.name, doc.parameters)?;
        if let Some(limit) = doc.guard_limit {
            space.guard_limit = limit;
            space.explicit_guard = true;
        }
        Ok(space)
    }

    pub fn awd_lstm() -> Self {
        ConfigSpace::from_json(AWD_LSTM_SPACE).expect("bundled space is valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.document()).expect("space serializes")
    }

    fn document(&self) -> SpaceDocument {
        SpaceDocument {
            name: self.name.clone(),
            guard_limit: self.explicit_guard.then_some(self.guard_limit),
            parameters: self.params.clone(),
        }
    }

    /// Digest of the canonical (compact) space document.
    pub fn digest(&self) -> String {
        let mut doc = self.document();
        doc.guard_limit = None;
        let text = serde_json::to_string(&doc).expect("space serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.params.is_empty() {
            out.push(Violation::EmptySpace);
        }
        let mut seen = HashMap::new();
        for p in &self.params {
            if seen.insert(p.name.as_str(), ()).is_some() {
                out.push(Violation::DuplicateParam(p.name.clone()));
            }
            p.violations(&mut out);
        }
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn guard_limit(&self) -> u64 {
        self.guard_limit
    }

    pub fn with_guard_limit(mut self, limit: u64) -> Self {
        self.guard_limit = limit;
        self.explicit_guard = true;
        self
    }

    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    /// Number of grid points, saturating at `u128::MAX`.
    pub fn size(&self) -> u128 {
        self.params
            .iter()
            .fold(1u128, |acc, p| acc.saturating_mul(p.grid.len() as u128))
    }

    /// Names of parameters whose default is not one of its grid values.
    pub fn off_grid_defaults(&self) -> Vec<&str> {
        self.params
            .iter()
            .filter(|p| !p.default_on_grid())
            .map(|p| p.name.as_str())
            .collect()
    }

    pub fn default_config(&self) -> Configuration {
        self.params
            .iter()
            .map(|p| (p.name.clone(), p.default))
            .collect()
    }

    /// Checks names and kinds. Off-grid values are legal.
    pub fn validate(&self, config: &Configuration) -> Result<(), SpaceError> {
        if config.len() != self.params.len() {
            return Err(SpaceError::InvalidConfig(format!(
                "expected {} parameters, got {}",
                self.params.len(),
                config.len()
            )));
        }
        for p in &self.params {
            let v = config.get(&p.name).ok_or_else(|| {
                SpaceError::InvalidConfig(format!("missing parameter `{}`", p.name))
            })?;
            if !p.kind.admits(v) {
                return Err(SpaceError::InvalidConfig(format!(
                    "{}: value {} does not conform to its kind",
                    p.name,
                    format_value(v)
                )));
            }
        }
        Ok(())
    }

    /// Hex digest identifying a configuration independent of construction order.
    pub fn canonical_key(&self, config: &Configuration) -> Result<String, SpaceError> {
        self.validate(config)?;
        Ok(config.canonical_key())
    }

    /// Grid index of every value (nearest index for off-grid values), in space order.
    pub fn indices(&self, config: &Configuration) -> Result<Vec<usize>, SpaceError> {
        self.validate(config)?;
        Ok(self
            .params
            .iter()
            .map(|p| p.nearest_index(config.get(&p.name).unwrap_or(p.default)))
            .collect())
    }

    pub fn from_indices(&self, indices: &[usize]) -> Configuration {
        self.params
            .iter()
            .zip(indices)
            .map(|(p, &i)| (p.name.clone(), p.grid[i]))
            .collect()
    }

    /// Replaces every off-grid value with its nearest grid value.
    pub fn snap(&self, config: &Configuration) -> Result<Configuration, SpaceError> {
        Ok(self.from_indices(&self.indices(config)?))
    }

    /// Lazily walks the full grid in lexicographic index order.
    pub fn enumerate(&self) -> Enumerate<'_> {
        Enumerate {
            space: self,
            cursor: self
                .params
                .iter()
                .all(|p| !p.grid.is_empty())
                .then(|| vec![0; self.params.len()]),
        }
    }

    pub fn materialize(&self) -> Result<Vec<Configuration>, SpaceError> {
        let size = self.size();
        if size > self.guard_limit as u128 {
            return Err(SpaceError::GuardLimit {
                size,
                limit: self.guard_limit,
            });
        }
        Ok(self.enumerate().collect())
    }

    /// Moves `param` by `step` grid positions, reflecting at the ends of the grid.
    ///
    /// An off-grid current value first snaps to its nearest grid value.
    pub fn neighbor(
        &self,
        config: &Configuration,
        param: &str,
        step: i64,
    ) -> Result<Configuration, SpaceError> {
        let spec = self
            .param(param)
            .ok_or_else(|| SpaceError::UnknownParam(param.to_string()))?;
        self.validate(config)?;
        let current = config.get(param).unwrap_or(spec.default);
        let target = reflect(spec.nearest_index(current), step, spec.grid.len());
        let mut out = config.clone();
        out.set(param, spec.grid[target]);
        Ok(out)
    }

    /// Draws each value independently and uniformly from its grid.
    pub fn random_config<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        self.params
            .iter()
            .map(|p| (p.name.clone(), p.grid[rng.random_range(0..p.grid.len())]))
            .collect()
    }
}

fn reflect(start: usize, step: i64, len: usize) -> usize {
    if len <= 1 {
        return 0;
    }
    let mut pos = start as i64;
    let mut dir = step.signum();
    let last = len as i64 - 1;
    for _ in 0..step.unsigned_abs() {
        if pos + dir < 0 || pos + dir > last {
            dir = -dir;
        }
        pos += dir;
    }
    pos as usize
}

pub struct Enumerate<'a> {
    space: &'a ConfigSpace,
    cursor: Option<Vec<usize>>,
}

impl Iterator for Enumerate<'_> {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        let current = self.cursor.as_mut()?;
        let out = self.space.from_indices(current);
        let mut pos = current.len();
        loop {
            if pos == 0 {
                self.cursor = None;
                break;
            }
            pos -= 1;
            current[pos] += 1;
            if current[pos] < self.space.params[pos].grid.len() {
                break;
            }
            current[pos] = 0;
        }
        Some(out)
    }
}

/// A full assignment of values to hyperparameter names.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(BTreeMap<String, f64>);

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.0.insert(name.into(), value);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entries in lexicographic name order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Text form hashed by [`Configuration::canonical_key`].
    pub fn canonical_text(&self) -> String {
        self.0
            .iter()
            .map(|(k, v)| format!("{k}={}", format_value(*v)))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn canonical_key(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }
}

impl<K: Into<String>> FromIterator<(K, f64)> for Configuration {
    fn from_iter<I: IntoIterator<Item = (K, f64)>>(iter: I) -> Self {
        Configuration(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}: {}", format_value(*v))?;
        }
        write!(f, "}}")
    }
}

/// Shortest decimal text that parses back to exactly `v`; negative zero renders as `0`.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn small(grids: &[&[f64]]) -> ConfigSpace {
        let params = grids
            .iter()
            .enumerate()
            .map(|(i, g)| ParamSpec::new(format!("p{i}"), ParamKind::Real, g.to_vec(), g[0]))
            .collect();
        ConfigSpace::new("small", params).unwrap()
    }

    #[test]
    fn awd_lstm_space_shape() {
        let space = ConfigSpace::awd_lstm();
        assert_eq!(space.len(), 11);
        assert!(space.params().iter().all(|p| p.grid.len() == 4));
        assert_eq!(space.size(), 4_194_304);
        assert_eq!(space.off_grid_defaults(), vec!["dropoute", "dropouti"]);
    }

    #[test]
    fn awd_lstm_defaults() {
        let d = ConfigSpace::awd_lstm().default_config();
        let expected = [
            ("emsize", 300.0),
            ("nhid", 1150.0),
            ("nlayers", 3.0),
            ("dropout", 0.4),
            ("dropoute", 0.1),
            ("dropouth", 0.3),
            ("dropouti", 0.65),
            ("wdrop", 0.5),
            ("bptt", 70.0),
            ("clip", 0.25),
            ("lr", 30.0),
        ];
        assert_eq!(d, expected.into_iter().collect());
    }

    #[test]
    fn single_param_default() {
        let space = ConfigSpace::new(
            "one",
            vec![ParamSpec::new("x", ParamKind::Integer, vec![1.0, 2.0], 2.0)],
        )
        .unwrap();
        assert_eq!(space.default_config(), [("x", 2.0)].into_iter().collect());
    }

    #[test]
    fn parse_rejects_bad_documents() {
        let err = ConfigSpace::from_json(r#"{"name":"e","parameters":[]}"#).unwrap_err();
        assert_eq!(err.to_string(), "empty space");

        let dup = r#"{"name":"d","parameters":[{"name":"x","kind":"real","grid":[0.3,0.3,0.4],"default":0.3}]}"#;
        assert!(ConfigSpace::from_json(dup)
            .unwrap_err()
            .to_string()
            .contains("duplicate grid value"));

        let dec = r#"{"name":"d","parameters":[{"name":"x","kind":"real","grid":[0.4,0.3],"default":0.3}]}"#;
        assert!(matches!(
            ConfigSpace::from_json(dec).unwrap_err(),
            SpaceError::Invalid(v) if v == vec![Violation::NonIncreasingGrid { param: "x".into() }]
        ));

        let kind = r#"{"name":"d","parameters":[{"name":"x","kind":"integer","grid":[1,2.5],"default":1}]}"#;
        assert!(ConfigSpace::from_json(kind)
            .unwrap_err()
            .to_string()
            .contains("kind integer"));

        let names = r#"{"name":"d","parameters":[
            {"name":"x","kind":"real","grid":[1],"default":1},
            {"name":"x","kind":"real","grid":[1],"default":1}]}"#;
        assert!(ConfigSpace::from_json(names)
            .unwrap_err()
            .to_string()
            .contains("duplicate parameter"));

        assert!(matches!(
            ConfigSpace::from_json("{"),
            Err(SpaceError::Malformed(_))
        ));
        assert!(matches!(
            ConfigSpace::from_json(r#"{"name":"d","parameters":[],"extra":1}"#),
            Err(SpaceError::Malformed(_))
        ));
    }

    #[test]
    fn round_trip_document() {
        let space = ConfigSpace::awd_lstm();
        let again = ConfigSpace::from_json(&space.to_json()).unwrap();
        assert_eq!(space, again);
        assert_eq!(space.digest(), again.digest());
    }

    #[test]
    fn canonical_key_ignores_insertion_order_and_spelling() {
        let space = ConfigSpace::awd_lstm();
        let a = space.default_config();
        let mut b = Configuration::new();
        for p in space.params().iter().rev() {
            b.set(p.name.clone(), p.default);
        }
        assert_eq!(
            space.canonical_key(&a).unwrap(),
            space.canonical_key(&b).unwrap()
        );

        let mut c = a.clone();
        c.set("emsize", 350.0);
        assert_ne!(a.canonical_key(), c.canonical_key());

        let x: Configuration = [("w", "0.5".parse::<f64>().unwrap())].into_iter().collect();
        let y: Configuration = [("w", "0.50".parse::<f64>().unwrap())]
            .into_iter()
            .collect();
        assert_eq!(x.canonical_key(), y.canonical_key());
        let z: Configuration = [("w", -0.0)].into_iter().collect();
        let w: Configuration = [("w", 0.0)].into_iter().collect();
        assert_eq!(z.canonical_key(), w.canonical_key());
    }

    #[test]
    fn canonical_key_rejects_foreign_config() {
        let space = ConfigSpace::awd_lstm();
        let bad: Configuration = [("emsize", 300.0)].into_iter().collect();
        assert!(space.canonical_key(&bad).is_err());
        let mut frac = space.default_config();
        frac.set("nlayers", 2.5);
        assert!(space.canonical_key(&frac).is_err());
    }

    #[test]
    fn enumerate_counts() {
        let space = small(&[&[1.0, 2.0], &[1.0, 2.0, 3.0]]);
        let all: Vec<_> = space.enumerate().collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], space.from_indices(&[0, 0]));
        assert_eq!(all[1], space.from_indices(&[0, 1]));
        assert_eq!(all[5], space.from_indices(&[1, 2]));
    }

    #[test]
    fn enumerate_full_awd_lstm_space() {
        let space = ConfigSpace::awd_lstm();
        assert_eq!(space.enumerate().count(), 4_194_304);
        let guarded = space.clone().with_guard_limit(1_000_000);
        assert!(matches!(
            guarded.materialize(),
            Err(SpaceError::GuardLimit { .. })
        ));
    }

    #[test]
    fn neighbor_steps_and_reflects() {
        let space = ConfigSpace::awd_lstm();
        let d = space.default_config();
        assert_eq!(
            space.neighbor(&d, "emsize", 1).unwrap().get("emsize"),
            Some(350.0)
        );
        assert_eq!(
            space.neighbor(&d, "emsize", -1).unwrap().get("emsize"),
            Some(350.0)
        );
        assert_eq!(
            space.neighbor(&d, "dropouti", 1).unwrap().get("dropouti"),
            Some(0.5)
        );
        assert_eq!(
            space.neighbor(&d, "emsize", 4).unwrap().get("emsize"),
            Some(400.0)
        );
        assert!(matches!(
            space.neighbor(&d, "nope", 1),
            Err(SpaceError::UnknownParam(_))
        ));
    }

    #[test]
    fn snap_ties_go_low() {
        let p = ParamSpec::new("x", ParamKind::Real, vec![1.0, 3.0], 2.0);
        assert_eq!(p.nearest_index(2.0), 0);
        assert_eq!(p.nearest_index(2.5), 1);
        assert_eq!(p.nearest_index(-9.0), 0);
    }

    #[test]
    fn random_config_is_seeded_and_on_grid() {
        let space = ConfigSpace::awd_lstm();
        let a = space.random_config(&mut ChaCha8Rng::seed_from_u64(5));
        let b = space.random_config(&mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        for p in space.params() {
            assert!(p.index_of(a.get(&p.name).unwrap()).is_some());
        }
    }

    #[test]
    fn random_config_uniform_frequencies() {
        let space = small(&[&[1.0, 2.0, 3.0, 4.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 4];
        let draws = 10_000;
        for _ in 0..draws {
            let c = space.random_config(&mut rng);
            counts[space.params()[0].index_of(c.get("p0").unwrap()).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 0.25).abs() <= 0.02, "{counts:?}");
        }
    }

    #[test]
    fn enumerate_keys_are_unique() {
        let space = small(&[
            &[0.1, 0.2, 0.3],
            &[1.0, 2.0],
            &[5.0, 6.0, 7.0, 8.0],
            &[0.25, 0.5, 0.75],
        ]);
        let keys: HashSet<_> = space.enumerate().map(|c| c.canonical_key()).collect();
        assert_eq!(keys.len() as u128, space.size());
    }

    fn grid_strategy() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::btree_set(-1000i32..1000, 1..6)
            .prop_map(|s| s.into_iter().map(|v| v as f64 / 8.0).collect())
    }

    proptest! {
        #[test]
        fn neighbor_stays_on_grid(grid in grid_strategy(), start in -200.0f64..200.0, step in -9i64..9) {
            let space = ConfigSpace::new("p", vec![ParamSpec::new("x", ParamKind::Real, grid.clone(), start)]).unwrap();
            let out = space.neighbor(&space.default_config(), "x", step).unwrap();
            prop_assert!(grid.contains(&out.get("x").unwrap()));
        }

        #[test]
        fn document_round_trips(grids in proptest::collection::vec(grid_strategy(), 1..5)) {
            let params = grids.into_iter().enumerate()
                .map(|(i, g)| { let d = g[g.len() / 2]; ParamSpec::new(format!("q{i}"), ParamKind::Real, g, d) })
                .collect();
            let space = ConfigSpace::new("rt", params).unwrap();
            prop_assert_eq!(ConfigSpace::from_json(&space.to_json()).unwrap(), space);
        }

        #[test]
        fn enumeration_is_exhaustive(sizes in proptest::collection::vec(1usize..5, 1..5)) {
            let params = sizes.iter().enumerate()
                .map(|(i, &n)| ParamSpec::new(format!("q{i}"), ParamKind::Integer, (0..n).map(|v| v as f64).collect(), 0.0))
                .collect();
            let space = ConfigSpace::new("e", params).unwrap();
            let keys: HashSet<_> = space.enumerate().map(|c| c.canonical_key()).collect();
            prop_assert_eq!(keys.len(), sizes.iter().product::<usize>());
        }
    }
}
