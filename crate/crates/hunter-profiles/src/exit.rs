//! Failure classes and their process exit codes.

use hunter_core::Error;
use thiserror::Error as ThisError;

use crate::config::ConfigError;

/// The exit-code table shown in `--help`.
pub const EXIT_CODE_HELP: &str = "\
Exit codes:
  0  success
  1  verify: at least one acceptance criterion failed
  2  invalid input: parameter out of its domain, malformed config file,
     bad flag, or bad HUNTER_PROFILES_THREADS
  3  config file could not be read
  4  output could not be written
  5  singular point: lost sonic branch, resonance, or series trust region
  6  integration failure: step underflow or loss of positivity
  7  fit or series evaluation did not converge
  8  profile assembly failed: gluing mismatch or ambiguous crossing";

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Numerics(#[from] Error),
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot read config '{path}': {source}")]
    ConfigRead { path: String, source: std::io::Error },
    #[error("cannot write '{path}': {source}")]
    Output { path: String, source: std::io::Error },
    #[error("{failed} acceptance criteria failed")]
    VerifyFailed { failed: usize },
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::VerifyFailed { .. } => 1,
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::ConfigRead { .. } => 3,
            CliError::Output { .. } => 4,
            CliError::Numerics(e) => match e {
                Error::Domain(_) => 2,
                Error::SonicSingular { .. }
                | Error::OriginSingular(_)
                | Error::BranchLost { .. }
                | Error::DegenerateBranch
                | Error::Resonant { .. }
                | Error::ResonantOrder(_)
                | Error::TrustRegionExceeded { .. } => 5,
                Error::StiffnessFailure { .. } | Error::PositivityViolation { .. } => 6,
                Error::FitUnreliable { .. } | Error::ConvergenceFailure { .. } | Error::OutsideWindow { .. } => 7,
                Error::GlueMismatch { .. } | Error::AmbiguousCrossing { .. } => 8,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_and_config_errors_share_code_two() {
        assert_eq!(CliError::Numerics(Error::Domain("x".into())).code(), 2);
        assert_eq!(CliError::Config(ConfigError::Syntax { line: 1, text: "x".into() }).code(), 2);
    }

    #[test]
    fn every_code_is_in_the_help_table() {
        for code in 0..=8 {
            assert!(EXIT_CODE_HELP.contains(&format!("\n  {code}  ")), "code {code}");
        }
    }
}
