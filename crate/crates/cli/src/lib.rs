//! Library side of the `fredholm-bvp` command-line tool: problem files, tolerance profiles and
//! the four subcommands. `main.rs` only parses arguments and maps results to exit codes.

pub mod commands;
pub mod schema;
pub mod tolerances;

use std::fmt;

pub use commands::{analyze, limits, solve, verify, Output};
pub use schema::{Problem, ProblemFile};
pub use tolerances::{Overrides, Profile, Resolved};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INCONSISTENT: i32 = 4;
pub const EXIT_VERIFY_FAIL: i32 = 5;
pub const EXIT_NOT_CONVERGED: i32 = 6;

/// Environment variable selecting the default tolerance profile.
pub const PROFILE_ENV: &str = "FREDHOLM_BVP_PROFILE";

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent input.
    Schema(String),
    /// The computation itself failed.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(msg) => write!(f, "input error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<fredholm_bvp::Error> for CliError {
    fn from(e: fredholm_bvp::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

/// Reads and validates a problem file.
pub fn load_problem(path: &std::path::Path) -> Result<(ProblemFile, Problem), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
    let file = ProblemFile::parse(&text)?;
    let problem = file.build()?;
    Ok((file, problem))
}

/// Pretty JSON with a trailing newline; struct fields keep their declaration order.
pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}
