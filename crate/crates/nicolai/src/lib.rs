//! File formats, verification suites and the command-line driver for the
//! Nicolai fermion lattice model. The numerical kernel is `nicolai-core`.

use std::fmt;

use serde_json::Value;

pub mod cli;
pub mod formats;
pub mod suite;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "NICOLAI_THREADS";

#[derive(Debug)]
pub enum AppError {
    /// Bad flags, spec files or parameters.
    Config(String),
    Io(String),
    /// A numerical routine failed outright.
    Numeric(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Io(_) => 1,
            AppError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "configuration error: {m}"),
            AppError::Io(m) => write!(f, "i/o error: {m}"),
            AppError::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<nicolai_core::Error> for AppError {
    fn from(e: nicolai_core::Error) -> Self {
        use nicolai_core::Error as E;
        match e {
            E::Numeric(_) | E::NotSymmetric | E::NotInvariant | E::BasisMismatch | E::LeavesSector => {
                AppError::Numeric(e.to_string())
            }
            _ => AppError::Config(e.to_string()),
        }
    }
}

/// One named pass/fail item of a verification run.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: Value) -> Self {
        Check { name: name.into(), passed, detail }
    }
}

/// Thread pool sized by `NICOLAI_THREADS` (all cores when unset or invalid).
pub fn thread_pool() -> rayon::ThreadPool {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(AppError::Config(String::new()).exit_code(), 2);
        assert_eq!(AppError::Io(String::new()).exit_code(), 1);
        assert_eq!(AppError::from(nicolai_core::Error::NotSymmetric).exit_code(), 3);
        assert_eq!(AppError::from(nicolai_core::Error::Numeric("x".into())).exit_code(), 3);
        assert_eq!(AppError::from(nicolai_core::Error::InvalidInterval { k: 1, l: 0 }).exit_code(), 2);
    }
}
