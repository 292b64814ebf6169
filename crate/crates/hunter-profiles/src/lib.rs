//! Command-line surface of `hunter-core`: configuration, rendering and the
//! subcommands, kept in a library so they can be tested without a process.

pub mod commands;
pub mod config;
pub mod exit;
pub mod output;

pub use commands::{run, Command, Context, Rendered};
pub use config::{Format, RunConfig};
pub use exit::CliError;

/// Environment variable capping scan worker threads.
pub const THREADS_ENV: &str = "HUNTER_PROFILES_THREADS";

/// Reads the thread cap. Unset or empty means no cap.
pub fn threads_from_env(value: Option<&str>) -> Result<usize, CliError> {
    match value.map(str::trim) {
        None | Some("") => Ok(0),
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, found '{v}'"))),
        },
    }
}
