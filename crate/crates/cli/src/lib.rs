//! Command-line front end: data generation, fitting with HBIC selection,
//! replicated benchmarks and the dense convergence diagnostics.
//!
//! Exit codes: 0 converged (or success), 1 I/O, data or failed diagnostics,
//! 2 iteration limit reached, 3 diverged, 4 usage error.

pub mod args;
pub mod bench;
pub mod diagnose;
pub mod fit;
pub mod generate;
pub mod manifest;

use std::ffi::OsString;
use std::fmt;

use clap::Parser;
use qpadm_core::Error as CoreError;

use args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

/// Environment variable bounding the number of concurrent workers.
pub const WORKERS_ENV: &str = "QPADM_WORKERS";

/// A command failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn failure(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FAILURE,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::Diverged { .. } => EXIT_DIVERGED,
            CoreError::Parameter { .. } | CoreError::Partition { .. } | CoreError::Oversize { .. } => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::failure(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches a path to I/O-style failures.
pub(crate) fn with_path<T, E: fmt::Display>(r: Result<T, E>, path: &std::path::Path) -> CliResult<T> {
    r.map_err(|e| CliError::failure(format!("{}: {e}", path.display())))
}

/// Worker limit from `QPADM_WORKERS`, defaulting to the available parallelism.
pub fn worker_limit() -> CliResult<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::usage(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = worker_limit().and_then(|workers| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::failure(e.to_string()))?;
        pool.install(|| dispatch(cli.command, workers))
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

fn dispatch(command: Command, workers: usize) -> CliResult<i32> {
    match command {
        Command::Generate(a) => generate::run(&a),
        Command::Fit(a) => fit::run(&a),
        Command::Bench(a) => bench::run(&a, workers),
        Command::Diagnose(a) => diagnose::run(&a),
    }
}
