//! URI-like objective descriptors, e.g. `surrogate:separable?noise=0.5`,
//! `table:runs/a.jsonl`, or `worker:python3 worker.py --fast`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use super::surrogate::{CoupledSurrogate, SeparableSurrogate, SurrogateError};
use super::table::TableOracle;
use super::worker::{WorkerError, WorkerObjective, WorkerSettings};
use super::Objective;
use crate::journal::{self, JournalError};
use crate::space::ConfigSpace;

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("invalid objective spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Worker(#[from] WorkerError),
    #[error("cannot load table journal: {0}")]
    Table(#[from] JournalError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    SurrogateSeparable {
        base: f64,
        noise_sd: f64,
        seed: u64,
        weights: Option<Vec<f64>>,
        targets: Option<Vec<usize>>,
    },
    SurrogateCoupled {
        base: f64,
        scale: f64,
        seed: u64,
    },
    Table {
        path: PathBuf,
    },
    Worker {
        command: Vec<String>,
        handshake_timeout: Duration,
        eval_timeout: Duration,
    },
}

impl ObjectiveSpec {
    pub fn is_worker(&self) -> bool {
        matches!(self, ObjectiveSpec::Worker { .. })
    }

    pub fn set_eval_timeout(&mut self, timeout: Duration) {
        if let ObjectiveSpec::Worker { eval_timeout, .. } = self {
            *eval_timeout = timeout;
        }
    }

    pub fn set_handshake_timeout(&mut self, timeout: Duration) {
        if let ObjectiveSpec::Worker {
            handshake_timeout, ..
        } = self
        {
            *handshake_timeout = timeout;
        }
    }

    /// Instantiates the objective. Worker specs start `parallelism` processes.
    pub fn build(
        &self,
        space: &ConfigSpace,
        parallelism: usize,
    ) -> Result<Box<dyn Objective>, SpecError> {
        Ok(match self {
            ObjectiveSpec::SurrogateSeparable {
                base,
                noise_sd,
                seed,
                weights,
                targets,
            } => {
                let seeded = SeparableSurrogate::seeded(space, *base, *noise_sd, *seed)?;
                match (weights, targets) {
                    (None, None) => Box::new(seeded),
                    _ => {
                        let weights = weights.clone().unwrap_or_else(|| vec![1.0; space.len()]);
                        let targets = match targets {
                            Some(t) => t.clone(),
                            None => space
                                .indices(&seeded.target_config())
                                .expect("target is valid"),
                        };
                        Box::new(SeparableSurrogate::new(
                            space, *base, weights, targets, *noise_sd, *seed,
                        )?)
                    }
                }
            }
            ObjectiveSpec::SurrogateCoupled { base, scale, seed } => {
                Box::new(CoupledSurrogate::chain(space, *base, *scale, *seed)?)
            }
            ObjectiveSpec::Table { path } => {
                let loaded = journal::load(path)?;
                Box::new(TableOracle::new(
                    loaded.records.into_iter().map(|e| e.record),
                ))
            }
            ObjectiveSpec::Worker {
                command,
                handshake_timeout,
                eval_timeout,
            } => {
                let settings = WorkerSettings {
                    command: command.clone(),
                    handshake_timeout: *handshake_timeout,
                    eval_timeout: *eval_timeout,
                    pool_size: parallelism.max(1),
                };
                Box::new(WorkerObjective::spawn(space, settings)?)
            }
        })
    }
}

fn parse_query(spec: &str, query: &str) -> Result<BTreeMap<String, String>, SpecError> {
    let mut out = BTreeMap::new();
    for pair in query.split('&').filter(|p| !p.is_empty()) {
        let (k, v) = pair.split_once('=').ok_or_else(|| SpecError::Parse {
            spec: spec.to_string(),
            reason: format!("expected key=value, got `{pair}`"),
        })?;
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

fn take<T: FromStr>(
    spec: &str,
    q: &mut BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T, SpecError> {
    match q.remove(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| SpecError::Parse {
            spec: spec.to_string(),
            reason: format!("bad value for `{key}`: `{v}`"),
        }),
    }
}

fn take_list<T: FromStr>(
    spec: &str,
    q: &mut BTreeMap<String, String>,
    key: &str,
) -> Result<Option<Vec<T>>, SpecError> {
    let Some(v) = q.remove(key) else {
        return Ok(None);
    };
    v.split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| SpecError::Parse {
                spec: spec.to_string(),
                reason: format!("bad list entry for `{key}`: `{s}`"),
            })
        })
        .collect::<Result<Vec<T>, _>>()
        .map(Some)
}

/// Splits a command line on whitespace, honoring single and double quotes.
fn split_command(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    let mut in_word = false;
    for c in text.chars() {
        match (quote, c) {
            (Some(q), c) if c == q => quote = None,
            (Some(_), c) => cur.push(c),
            (None, '"' | '\'') => {
                quote = Some(c);
                in_word = true;
            }
            (None, c) if c.is_whitespace() => {
                if in_word {
                    out.push(std::mem::take(&mut cur));
                    in_word = false;
                }
            }
            (None, c) => {
                cur.push(c);
                in_word = true;
            }
        }
    }
    if in_word {
        out.push(cur);
    }
    out
}

impl FromStr for ObjectiveSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        let err = |reason: &str| SpecError::Parse {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let (scheme, rest) = s
            .split_once(':')
            .ok_or_else(|| err("missing `kind:` prefix"))?;
        match scheme {
            "surrogate" => {
                let (kind, query) = rest.split_once('?').unwrap_or((rest, ""));
                let mut q = parse_query(s, query)?;
                let spec = match kind {
                    "separable" => ObjectiveSpec::SurrogateSeparable {
                        base: take(s, &mut q, "base", 100.0)?,
                        noise_sd: take(s, &mut q, "noise", 0.0)?,
                        seed: take(s, &mut q, "seed", 0)?,
                        weights: take_list(s, &mut q, "weights")?,
                        targets: take_list(s, &mut q, "targets")?,
                    },
                    "coupled" => ObjectiveSpec::SurrogateCoupled {
                        base: take(s, &mut q, "base", 100.0)?,
                        scale: take(s, &mut q, "scale", 10.0)?,
                        seed: take(s, &mut q, "seed", 0)?,
                    },
                    _ => return Err(err("surrogate kind must be `separable` or `coupled`")),
                };
                if let Some(k) = q.keys().next() {
                    return Err(err(&format!("unknown setting `{k}`")));
                }
                Ok(spec)
            }
            "table" if !rest.is_empty() => Ok(ObjectiveSpec::Table {
                path: PathBuf::from(rest),
            }),
            "worker" => {
                let command = split_command(rest);
                if command.is_empty() {
                    return Err(err("worker command is empty"));
                }
                Ok(ObjectiveSpec::Worker {
                    command,
                    handshake_timeout: Duration::from_secs(30),
                    eval_timeout: Duration::from_secs(3600),
                })
            }
            _ => Err(err("kind must be `surrogate`, `table`, or `worker`")),
        }
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveSpec::SurrogateSeparable {
                base,
                noise_sd,
                seed,
                weights,
                targets,
            } => {
                write!(
                    f,
                    "surrogate:separable?base={base}&noise={noise_sd}&seed={seed}"
                )?;
                if let Some(w) = weights {
                    write!(f, "&weights={}", join(w))?;
                }
                if let Some(t) = targets {
                    write!(f, "&targets={}", join(t))?;
                }
                Ok(())
            }
            ObjectiveSpec::SurrogateCoupled { base, scale, seed } => {
                write!(f, "surrogate:coupled?base={base}&scale={scale}&seed={seed}")
            }
            ObjectiveSpec::Table { path } => write!(f, "table:{}", path.display()),
            ObjectiveSpec::Worker { command, .. } => {
                let quoted: Vec<String> = command
                    .iter()
                    .map(|a| {
                        if a.contains(char::is_whitespace) || a.is_empty() {
                            format!("\"{a}\"")
                        } else {
                            a.clone()
                        }
                    })
                    .collect();
                write!(f, "worker:{}", quoted.join(" "))
            }
        }
    }
}
