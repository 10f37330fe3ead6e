//! Target adapters: one scripted mock for deterministic tests, one that
//! drives an instrumented SQLite shell harness in a child process.

use super::bitmap::CoverageBitmap;
use super::classify::{ExitKind, RawExecution};
use std::io::Write as _;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};
use thiserror::Error;

/// Environment variable naming the shared coverage region file.
pub const COV_PATH_ENV: &str = "SQUIRRELKIT_COV_PATH";
/// Environment variable carrying the region length in bytes.
pub const COV_LEN_ENV: &str = "SQUIRRELKIT_COV_LEN";

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("failed to launch target: {0}")]
    Launch(std::io::Error),
    #[error("coverage region i/o: {0}")]
    Coverage(std::io::Error),
    #[error("target i/o: {0}")]
    Io(std::io::Error),
}

/// Maps query text to a raw result plus per-execution coverage. Every
/// execution runs against a fresh empty database; nothing persists between
/// calls.
pub trait TargetAdapter {
    fn execute(&mut self, query: &[u8], timeout: Duration) -> Result<RawExecution, AdapterError>;
    fn bitmap_len(&self) -> usize;
    fn name(&self) -> &'static str;
}

// ---------------------------------------------------------------------
// mock adapter
// ---------------------------------------------------------------------

/// Canned behavior for queries matching a substring.
#[derive(Debug, Clone)]
pub struct MockRule {
    pub needle: String,
    pub outcome: MockOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockOutcome {
    SyntaxError,
    SemanticError,
    Correct,
    /// Terminate with this signal; coverage derives from the needle so
    /// every trigger shares one signature.
    Crash(i32),
    Timeout,
}

/// Scripted adapter: outcomes come from the first matching rule (default
/// Correct), coverage bytes are derived deterministically from the query
/// text, so identical campaigns replay identically.
pub struct MockAdapter {
    bitmap_len: usize,
    rules: Vec<MockRule>,
    /// coverage positions touched per query
    edges_per_query: usize,
}

impl MockAdapter {
    pub fn new(bitmap_len: usize, rules: Vec<MockRule>) -> MockAdapter {
        MockAdapter {
            bitmap_len,
            rules,
            edges_per_query: 6,
        }
    }

    fn coverage_for(&self, seed_bytes: &[u8]) -> CoverageBitmap {
        let mut cov = CoverageBitmap::new(self.bitmap_len);
        let mut h: u64 = 0xcbf29ce484222325;
        for &b in seed_bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x100000001b3);
        }
        for _ in 0..self.edges_per_query {
            h ^= h >> 33;
            h = h.wrapping_mul(0xff51afd7ed558ccd);
            cov.saturating_hit((h as usize) % self.bitmap_len.max(1));
        }
        cov
    }
}

impl TargetAdapter for MockAdapter {
    fn execute(&mut self, query: &[u8], _timeout: Duration) -> Result<RawExecution, AdapterError> {
        let text = String::from_utf8_lossy(query);
        let outcome = self
            .rules
            .iter()
            .find(|r| text.contains(r.needle.as_str()))
            .map(|r| (r.outcome, r.needle.clone()));
        let (exit, stderr, cov_source): (ExitKind, String, Vec<u8>) = match outcome {
            Some((MockOutcome::SyntaxError, _)) => (
                ExitKind::Exited(0),
                "Error: near \"mock\": syntax error".to_string(),
                query.to_vec(),
            ),
            Some((MockOutcome::SemanticError, _)) => (
                ExitKind::Exited(0),
                "Error: no such table: mock".to_string(),
                query.to_vec(),
            ),
            Some((MockOutcome::Crash(sig), needle)) => {
                (ExitKind::Signaled(sig), String::new(), needle.into_bytes())
            }
            Some((MockOutcome::Timeout, _)) => {
                (ExitKind::TimedOut, String::new(), query.to_vec())
            }
            Some((MockOutcome::Correct, _)) | None => {
                (ExitKind::Exited(0), String::new(), query.to_vec())
            }
        };
        Ok(RawExecution {
            exit,
            stderr,
            stdout: String::new(),
            coverage: self.coverage_for(&cov_source),
        })
    }

    fn bitmap_len(&self) -> usize {
        self.bitmap_len
    }

    fn name(&self) -> &'static str {
        "mock"
    }
}

// ---------------------------------------------------------------------
// instrumented sqlite adapter
// ---------------------------------------------------------------------

/// Spawns an instrumented SQLite shell harness per execution. The harness
/// reads the query on stdin, runs it against an in-memory database (the
/// database is discarded with the process) and mirrors its edge counters
/// into a shared file region named by [`COV_PATH_ENV`].
pub struct InstrumentedSqliteAdapter {
    binary: PathBuf,
    bitmap_len: usize,
    cov_path: PathBuf,
}

impl InstrumentedSqliteAdapter {
    pub fn new(binary: PathBuf, bitmap_len: usize) -> Result<Self, AdapterError> {
        let cov_path = std::env::temp_dir().join(format!(
            "squirrelkit-cov-{}-{:x}",
            std::process::id(),
            crate::ir::fresh_id(),
        ));
        std::fs::write(&cov_path, vec![0u8; bitmap_len]).map_err(AdapterError::Coverage)?;
        Ok(InstrumentedSqliteAdapter {
            binary,
            bitmap_len,
            cov_path,
        })
    }
}

impl Drop for InstrumentedSqliteAdapter {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.cov_path);
    }
}

impl TargetAdapter for InstrumentedSqliteAdapter {
    fn execute(&mut self, query: &[u8], timeout: Duration) -> Result<RawExecution, AdapterError> {
        // zero the shared region; the child mmaps and updates it in place,
        // so counters survive even a crashing execution
        std::fs::write(&self.cov_path, vec![0u8; self.bitmap_len])
            .map_err(AdapterError::Coverage)?;

        let mut child = Command::new(&self.binary)
            .env(COV_PATH_ENV, &self.cov_path)
            .env(COV_LEN_ENV, self.bitmap_len.to_string())
            .stdin(Stdio::piped())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(AdapterError::Launch)?;

        if let Some(mut stdin) = child.stdin.take() {
            // the child may exit before reading everything; a broken pipe
            // here is part of normal operation
            let _ = stdin.write_all(query);
        }

        let deadline = Instant::now() + timeout;
        let mut timed_out = false;
        let status = loop {
            match child.try_wait().map_err(AdapterError::Io)? {
                Some(status) => break Some(status),
                None => {
                    if Instant::now() >= deadline {
                        timed_out = true;
                        let _ = child.kill();
                        let _ = child.wait();
                        break None;
                    }
                    std::thread::sleep(Duration::from_millis(1));
                }
            }
        };

        let mut stderr = String::new();
        if let Some(mut pipe) = child.stderr.take() {
            use std::io::Read as _;
            let _ = pipe.read_to_string(&mut stderr);
        }

        let cov_bytes = std::fs::read(&self.cov_path).map_err(AdapterError::Coverage)?;
        let mut coverage = CoverageBitmap::from_bytes(cov_bytes);
        if coverage.len() != self.bitmap_len {
            coverage = CoverageBitmap::new(self.bitmap_len);
        }

        let exit = if timed_out {
            ExitKind::TimedOut
        } else {
            let status = status.expect("status present unless timed out");
            #[cfg(unix)]
            {
                use std::os::unix::process::ExitStatusExt as _;
                match status.signal() {
                    Some(sig) => ExitKind::Signaled(sig),
                    None => ExitKind::Exited(status.code().unwrap_or(0)),
                }
            }
            #[cfg(not(unix))]
            {
                ExitKind::Exited(status.code().unwrap_or(0))
            }
        };

        Ok(RawExecution {
            exit,
            stderr,
            stdout: String::new(),
            coverage,
        })
    }

    fn bitmap_len(&self) -> usize {
        self.bitmap_len
    }

    fn name(&self) -> &'static str {
        "instrumented-sqlite"
    }
}
