use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use super::wire::{WireRequest, WireResponse};
use super::{check_dims, Segmenter, SegmenterAnswer, SegmenterError, SegmenterQuery};

#[derive(Clone, Debug, PartialEq)]
pub struct ExternalConfig {
    pub program: String,
    pub args: Vec<String>,
    /// Per-query deadline.
    pub timeout: Duration,
}

impl ExternalConfig {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

    pub fn new(program: impl Into<String>) -> Self {
        Self {
            program: program.into(),
            args: Vec::new(),
            timeout: Self::DEFAULT_TIMEOUT,
        }
    }

    pub fn arg(mut self, arg: impl Into<String>) -> Self {
        self.args.push(arg.into());
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Splits a command line on whitespace. No shell quoting is interpreted.
    pub fn from_command_line(cmd: &str) -> Option<Self> {
        let mut parts = cmd.split_whitespace().map(str::to_owned);
        let program = parts.next()?;
        Some(Self {
            program,
            args: parts.collect(),
            timeout: Self::DEFAULT_TIMEOUT,
        })
    }
}

/// A long-lived child process answering one JSON line per request.
pub struct ExternalSegmenter {
    config: ExternalConfig,
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    dead: Option<String>,
}

impl ExternalSegmenter {
    pub fn spawn(config: &ExternalConfig) -> Result<Self, SegmenterError> {
        let mut child = Command::new(&config.program)
            .args(&config.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| SegmenterError::ChildExited(format!("cannot start {:?}: {e}", config.program)))?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(Self {
            config: config.clone(),
            child,
            stdin,
            lines: rx,
            next_id: 1,
            dead: None,
        })
    }

    fn exit_status(&mut self) -> String {
        match self.child.try_wait() {
            Ok(Some(status)) => status.to_string(),
            Ok(None) => "stdout closed".to_string(),
            Err(e) => e.to_string(),
        }
    }

    fn kill(&mut self, reason: String) {
        self.stdin = None;
        let _ = self.child.kill();
        let _ = self.child.wait();
        self.dead = Some(reason);
    }

    fn roundtrip(&mut self, line: &str) -> Result<String, SegmenterError> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| SegmenterError::ChildExited("stdin closed".into()))?;
        let written = stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.write_all(b"\n"))
            .and_then(|_| stdin.flush());
        if let Err(e) = written {
            // A broken pipe usually means the child is gone.
            thread::sleep(Duration::from_millis(20));
            let status = self.exit_status();
            self.kill(status.clone());
            return Err(if e.kind() == std::io::ErrorKind::BrokenPipe {
                SegmenterError::ChildExited(status)
            } else {
                SegmenterError::Io(e)
            });
        }
        match self.lines.recv_timeout(self.config.timeout) {
            Ok(Ok(reply)) => Ok(reply),
            Ok(Err(e)) => {
                self.kill(e.to_string());
                Err(SegmenterError::Io(e))
            }
            Err(RecvTimeoutError::Timeout) => {
                self.kill("timed out".into());
                Err(SegmenterError::Timeout(self.config.timeout))
            }
            Err(RecvTimeoutError::Disconnected) => {
                let _ = self.child.wait();
                let status = self.exit_status();
                self.kill(status.clone());
                Err(SegmenterError::ChildExited(status))
            }
        }
    }
}

impl Segmenter for ExternalSegmenter {
    fn name(&self) -> &str {
        "external"
    }

    fn predict(&mut self, query: &SegmenterQuery) -> Result<SegmenterAnswer, SegmenterError> {
        if let Some(reason) = &self.dead {
            return Err(SegmenterError::ChildExited(reason.clone()));
        }
        let id = self.next_id;
        self.next_id += 1;
        let request = WireRequest::from_query(id, query)?;
        let reply = self.roundtrip(&request.to_line())?;
        let probabilities = WireResponse::from_line(&reply)?.into_mask(id, query.dims())?;
        let answer = SegmenterAnswer { probabilities };
        check_dims(query, &answer)?;
        Ok(answer)
    }
}

impl Drop for ExternalSegmenter {
    fn drop(&mut self) {
        // Closing stdin asks a well-behaved child to exit.
        self.stdin = None;
        for _ in 0..10 {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(5));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Sends one query to a running external segmenter.
pub fn external_predict(
    segmenter: &mut ExternalSegmenter,
    query: &SegmenterQuery,
) -> Result<SegmenterAnswer, SegmenterError> {
    segmenter.predict(query)
}
