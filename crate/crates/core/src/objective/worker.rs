//! Client side of the line-delimited JSON worker protocol.
//!
//! A worker is a child process that prints `{"type":"hello","protocol":1}` on
//! start, answers each `eval` request with one `result` line carrying the same
//! `id`, and exits when sent `{"type":"shutdown"}`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde_json::{json, Map, Value};

use super::{Budget, Objective, Outcome};
use crate::space::{ConfigSpace, Configuration, ParamKind};

pub const PROTOCOL_VERSION: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum WorkerError {
    #[error("worker command is empty")]
    EmptyCommand,
    #[error("failed to spawn worker `{command}`: {source}")]
    Spawn {
        command: String,
        source: std::io::Error,
    },
    #[error("worker handshake failed: {0}")]
    Handshake(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerSettings {
    /// Program followed by its arguments.
    pub command: Vec<String>,
    pub handshake_timeout: Duration,
    pub eval_timeout: Duration,
    /// Number of worker processes; each serves one request at a time.
    pub pool_size: usize,
}

impl WorkerSettings {
    pub fn new(command: Vec<String>) -> Self {
        WorkerSettings {
            command,
            handshake_timeout: Duration::from_secs(30),
            eval_timeout: Duration::from_secs(3600),
            pool_size: 1,
        }
    }
}

enum Failure {
    Timeout,
    Gone(String),
}

struct WorkerProcess {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl WorkerProcess {
    fn spawn(settings: &WorkerSettings) -> Result<Self, WorkerError> {
        let (program, args) = settings
            .command
            .split_first()
            .ok_or(WorkerError::EmptyCommand)?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| WorkerError::Spawn {
                command: settings.command.join(" "),
                source,
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut worker = WorkerProcess {
            child,
            stdin,
            lines: rx,
        };
        if let Err(e) = worker.handshake(settings.handshake_timeout) {
            worker.kill();
            return Err(e);
        }
        Ok(worker)
    }

    fn handshake(&mut self, timeout: Duration) -> Result<(), WorkerError> {
        let line = match self.lines.recv_timeout(timeout) {
            Ok(line) => line,
            Err(RecvTimeoutError::Timeout) => {
                return Err(WorkerError::Handshake(format!(
                    "no hello within {timeout:?}"
                )))
            }
            Err(RecvTimeoutError::Disconnected) => {
                return Err(WorkerError::Handshake("worker exited before hello".into()))
            }
        };
        let msg: Value = serde_json::from_str(&line).map_err(|_| {
            WorkerError::Handshake(format!("expected hello, got `{}`", excerpt(&line)))
        })?;
        if msg["type"] != "hello" {
            return Err(WorkerError::Handshake(format!(
                "expected hello, got `{}`",
                excerpt(&line)
            )));
        }
        match msg["protocol"].as_u64() {
            Some(PROTOCOL_VERSION) => Ok(()),
            other => Err(WorkerError::Handshake(format!(
                "unsupported protocol {other:?}"
            ))),
        }
    }

    fn request(
        &mut self,
        id: &str,
        payload: &Value,
        timeout: Duration,
    ) -> Result<Outcome, Failure> {
        let line = payload.to_string();
        writeln!(self.stdin, "{line}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Failure::Gone(format!("worker stdin closed: {e}")))?;
        let deadline = Instant::now() + timeout;
        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            let line = match self.lines.recv_timeout(remaining) {
                Ok(line) => line,
                Err(RecvTimeoutError::Timeout) => return Err(Failure::Timeout),
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(Failure::Gone("worker exited".into()))
                }
            };
            let Ok(msg) = serde_json::from_str::<Value>(&line) else {
                log::warn!("ignoring non-JSON worker output: {}", excerpt(&line));
                continue;
            };
            if msg["type"] != "result" || msg["id"] != id {
                log::warn!("ignoring unexpected worker message: {}", excerpt(&line));
                continue;
            }
            return Ok(parse_result(&msg));
        }
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }

    fn shutdown(mut self) {
        let sent = writeln!(self.stdin, "{}", json!({"type": "shutdown"}))
            .and_then(|_| self.stdin.flush());
        if sent.is_ok() {
            let deadline = Instant::now() + Duration::from_secs(5);
            while Instant::now() < deadline {
                match self.child.try_wait() {
                    Ok(Some(status)) => {
                        if !status.success() {
                            log::warn!("worker exited with {status} after shutdown");
                        }
                        return;
                    }
                    Ok(None) => thread::sleep(Duration::from_millis(10)),
                    Err(_) => break,
                }
            }
        }
        self.kill();
    }
}

fn parse_result(msg: &Value) -> Outcome {
    match msg["status"].as_str() {
        Some("ok") => {
            let metrics = msg["metrics"]
                .as_object()
                .map(|m| {
                    m.iter()
                        .filter_map(|(k, v)| v.as_f64().map(|v| (k.clone(), v)))
                        .collect()
                })
                .unwrap_or_default();
            Outcome::with_metrics(metrics)
        }
        Some("error") => Outcome::error(
            msg["message"]
                .as_str()
                .unwrap_or("worker reported an error"),
        ),
        other => Outcome::error(format!("unknown result status {other:?}")),
    }
}

fn excerpt(line: &str) -> String {
    line.chars().take(120).collect()
}

/// Objective served by a pool of external worker processes.
pub struct WorkerObjective {
    space: ConfigSpace,
    settings: WorkerSettings,
    idle: Mutex<Vec<WorkerProcess>>,
    available: Condvar,
    live: Mutex<usize>,
    next_id: AtomicU64,
}

impl WorkerObjective {
    /// Starts `pool_size` workers and waits for each handshake.
    pub fn spawn(space: &ConfigSpace, settings: WorkerSettings) -> Result<Self, WorkerError> {
        let mut workers = Vec::with_capacity(settings.pool_size.max(1));
        for _ in 0..settings.pool_size.max(1) {
            match WorkerProcess::spawn(&settings) {
                Ok(w) => workers.push(w),
                Err(e) => {
                    workers.into_iter().for_each(WorkerProcess::shutdown);
                    return Err(e);
                }
            }
        }
        let live = workers.len();
        Ok(WorkerObjective {
            space: space.clone(),
            settings,
            idle: Mutex::new(workers),
            available: Condvar::new(),
            live: Mutex::new(live),
            next_id: AtomicU64::new(1),
        })
    }

    fn checkout(&self) -> Option<WorkerProcess> {
        let mut idle = self.idle.lock().unwrap();
        loop {
            if let Some(w) = idle.pop() {
                return Some(w);
            }
            if *self.live.lock().unwrap() == 0 {
                return None;
            }
            idle = self.available.wait(idle).unwrap();
        }
    }

    fn checkin(&self, worker: Option<WorkerProcess>) {
        match worker {
            Some(w) => self.idle.lock().unwrap().push(w),
            None => *self.live.lock().unwrap() -= 1,
        }
        self.available.notify_one();
    }

    fn respawn(&self) -> Option<WorkerProcess> {
        match WorkerProcess::spawn(&self.settings) {
            Ok(w) => Some(w),
            Err(e) => {
                log::error!("worker respawn failed: {e}");
                None
            }
        }
    }

    fn config_json(&self, config: &Configuration) -> Value {
        let mut map = Map::new();
        for (name, value) in config.iter() {
            let integer = self
                .space
                .param(name)
                .is_some_and(|p| p.kind == ParamKind::Integer);
            let v = if integer && value.abs() < 9.0e15 {
                json!(value as i64)
            } else {
                json!(value)
            };
            map.insert(name.to_string(), v);
        }
        Value::Object(map)
    }
}

impl Objective for WorkerObjective {
    fn evaluate(&self, config: &Configuration, seed: u64, budget: &Budget) -> Outcome {
        let Some(mut worker) = self.checkout() else {
            return Outcome::error("no live worker process");
        };
        let id = self.next_id.fetch_add(1, Ordering::Relaxed).to_string();
        let payload = json!({
            "type": "eval",
            "id": id,
            "config": self.config_json(config),
            "seed": seed,
            "epochs": budget.epochs,
        });
        match worker.request(&id, &payload, self.settings.eval_timeout) {
            Ok(outcome) => {
                self.checkin(Some(worker));
                outcome
            }
            Err(Failure::Timeout) => {
                worker.kill();
                self.checkin(self.respawn());
                Outcome::timeout(format!("no result within {:?}", self.settings.eval_timeout))
            }
            Err(Failure::Gone(msg)) => {
                worker.kill();
                self.checkin(self.respawn());
                Outcome::error(msg)
            }
        }
    }
}

impl Drop for WorkerObjective {
    fn drop(&mut self) {
        let workers = std::mem::take(&mut *self.idle.lock().unwrap());
        workers.into_iter().for_each(WorkerProcess::shutdown);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Status;
    use crate::space::ParamSpec;
    use std::path::Path;

    const ECHO: &str = r#"
echo '{"type":"hello","protocol":1}'
while IFS= read -r line; do
  case "$line" in *'"shutdown"'*) exit 0;; esac
  id=$(printf '%s' "$line" | sed 's/.*"id":"\([^"]*\)".*/\1/')
  echo "{\"type\":\"result\",\"id\":\"$id\",\"status\":\"ok\",\"metrics\":{\"test_perplexity\":123.4}}"
done
"#;

    fn space() -> ConfigSpace {
        ConfigSpace::new(
            "w",
            vec![ParamSpec::new(
                "emsize",
                ParamKind::Integer,
                vec![300.0, 350.0],
                300.0,
            )],
        )
        .unwrap()
    }

    fn sh(script: &str) -> WorkerSettings {
        let mut s = WorkerSettings::new(vec!["sh".into(), "-c".into(), script.into()]);
        s.handshake_timeout = Duration::from_secs(5);
        s.eval_timeout = Duration::from_secs(5);
        s
    }

    #[test]
    fn ok_result_round_trip() {
        let space = space();
        let w = WorkerObjective::spawn(&space, sh(ECHO)).unwrap();
        let out = w.evaluate(&space.default_config(), 1, &Budget::default());
        assert_eq!(out, Outcome::ok(123.4));
        let again = w.evaluate(&space.default_config(), 1, &Budget::default());
        assert_eq!(again, Outcome::ok(123.4));
    }

    #[test]
    fn integer_params_are_sent_as_integers() {
        let space = space();
        let w = WorkerObjective::spawn(&space, sh(ECHO)).unwrap();
        assert_eq!(
            w.config_json(&space.default_config()).to_string(),
            r#"{"emsize":300}"#
        );
    }

    #[test]
    fn error_result_carries_message() {
        let script = r#"
echo '{"type":"hello","protocol":1}'
while IFS= read -r line; do
  case "$line" in *'"shutdown"'*) exit 0;; esac
  id=$(printf '%s' "$line" | sed 's/.*"id":"\([^"]*\)".*/\1/')
  echo "{\"type\":\"result\",\"id\":\"$id\",\"status\":\"error\",\"message\":\"diverged\"}"
done
"#;
        let space = space();
        let w = WorkerObjective::spawn(&space, sh(script)).unwrap();
        let out = w.evaluate(&space.default_config(), 1, &Budget::default());
        assert_eq!(out.status, Status::Error);
        assert_eq!(out.message.as_deref(), Some("diverged"));
    }

    #[test]
    fn missing_hello_is_a_startup_error() {
        let mut settings = sh("sleep 5");
        settings.handshake_timeout = Duration::from_millis(200);
        let err = WorkerObjective::spawn(&space(), settings).err().unwrap();
        assert!(matches!(err, WorkerError::Handshake(_)), "{err}");

        let err = WorkerObjective::spawn(&space(), sh("echo hi"))
            .err()
            .unwrap();
        assert!(matches!(err, WorkerError::Handshake(_)));
        assert!(matches!(
            WorkerObjective::spawn(&space(), WorkerSettings::new(vec![])),
            Err(WorkerError::EmptyCommand)
        ));
    }

    #[test]
    fn timeout_kills_and_respawns() {
        let dir = tempfile::tempdir().unwrap();
        let marker = dir.path().join("first");
        let script = format!(
            r#"
echo '{{"type":"hello","protocol":1}}'
if [ ! -e "{m}" ]; then touch "{m}"; read -r line; exec sleep 30; fi
{ECHO}"#,
            m = marker.display()
        );
        let mut settings = sh(&script);
        settings.eval_timeout = Duration::from_millis(300);
        let space = space();
        let w = WorkerObjective::spawn(&space, settings).unwrap();
        let first = w.evaluate(&space.default_config(), 1, &Budget::default());
        assert_eq!(first.status, Status::Timeout);
        assert!(Path::new(&marker).exists());
        let second = w.evaluate(&space.default_config(), 1, &Budget::default());
        assert_eq!(second, Outcome::ok(123.4));
    }

    #[test]
    fn worker_exit_becomes_error_record() {
        let script = r#"echo '{"type":"hello","protocol":1}'; read -r line; exit 1"#;
        let space = space();
        let w = WorkerObjective::spawn(&space, sh(script)).unwrap();
        let out = w.evaluate(&space.default_config(), 1, &Budget::default());
        assert_eq!(out.status, Status::Error);
    }

    #[test]
    fn pool_serves_concurrent_requests() {
        let space = space();
        let mut settings = sh(ECHO);
        settings.pool_size = 3;
        let w = WorkerObjective::spawn(&space, settings).unwrap();
        thread::scope(|s| {
            for _ in 0..6 {
                s.spawn(|| {
                    assert_eq!(
                        w.evaluate(&space.default_config(), 0, &Budget::default()),
                        Outcome::ok(123.4)
                    )
                });
            }
        });
    }
}
