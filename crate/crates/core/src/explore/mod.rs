//! Design-space exploration: expand knob ranges, build and run every
//! configuration, aggregate timings into a knowledge CSV; plus a cache of
//! per-function compiled versions.
//!
//! ```
//! use std::collections::BTreeMap;
//! use aweave::explore::{expand_ranges, Range};
//!
//! let knobs = BTreeMap::from([
//!     ("threads".to_string(), Range::Geometric { start: 1, factor: 2, count: 7 }),
//! ]);
//! let configs = expand_ranges(&knobs).unwrap();
//! let threads: Vec<i64> = configs.iter().map(|c| c["threads"]).collect();
//! assert_eq!(threads, [1, 2, 4, 8, 16, 32, 64]);
//! ```

mod cache;
mod config;
mod run;

pub use cache::{extract_closure, version_key, CompiledVersion, VersionCache, VersionOptions, DEFAULT_SHARED_COMPILER};
pub use config::{expand_ranges, ExploreConfig, FakeModel, Range};
pub use run::{run_exploration, stats_of, to_csv, ExploreResult, Row};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExploreError {
    #[error("invalid exploration config: {0}")]
    Config(String),
    #[error("compiler `{0}` not found on PATH")]
    CompilerNotFound(String),
    #[error("compilation failed for {config}:\n{log}")]
    CompileFailed { config: String, log: String },
    #[error("run of {config} exceeded {seconds} s")]
    RunTimeout { config: String, seconds: f64 },
    #[error("run of {config} exited with status {code}: {stderr}")]
    NonzeroExit { config: String, code: i32, stderr: String },
    #[error("energy meter: {0}")]
    Meter(String),
    #[error("cannot extract `{function}`: {reason}")]
    ClosureExtractionFailed { function: String, reason: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub(crate) fn io_err(path: &std::path::Path) -> impl Fn(std::io::Error) -> ExploreError + '_ {
    move |e| ExploreError::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Quotes a word for `sh -c`.
pub(crate) fn shell_quote(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_./=:,+@%".contains(c)) {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', "'\\''"))
    }
}

/// Fails with [`ExploreError::CompilerNotFound`] unless the first word of
/// `template` names an executable.
pub(crate) fn probe_compiler(template: &str) -> Result<(), ExploreError> {
    let prog = template.split_whitespace().next().unwrap_or_default();
    let found = if prog.contains('/') {
        std::path::Path::new(prog).is_file()
    } else {
        std::env::var_os("PATH")
            .is_some_and(|p| std::env::split_paths(&p).any(|d| !prog.is_empty() && d.join(prog).is_file()))
    };
    if found {
        Ok(())
    } else {
        Err(ExploreError::CompilerNotFound(prog.to_string()))
    }
}
