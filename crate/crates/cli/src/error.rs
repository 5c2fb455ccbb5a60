//! Process-level error type mapping every failure to a documented exit code.

use std::error::Error;
use std::fmt;

use serkit::cascade::CascadeError;
use serkit::corpus::CorpusError;
use serkit::eval::EvalError;
use serkit::learners::LearnerError;
use serkit::mfcc::MfccError;

/// What went wrong, bucketed by whose fault it is.
///
/// The bucket decides the process exit code: `0` success, `1` usage error
/// (bad flags or configuration), `2` data error (bad or inconsistent input
/// files), `3` internal error (a bug, not something the user can fix by
/// editing inputs).
#[derive(Debug)]
pub enum CliError {
    /// Malformed invocation or run configuration.
    Usage(String),
    /// Unreadable, malformed, or mutually inconsistent input data.
    Data(String),
    /// An invariant the tool itself is responsible for did not hold.
    Internal(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError::Data(message.into())
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError::Internal(message.into())
    }

    /// The process exit code this error class maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl Error for CliError {}

// Errors bubbling out of the toolkit describe problems with the user's
// audio, manifests, features, or trained models; they already carry the
// offending path or value, so they land in the data bucket as-is.

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<MfccError> for CliError {
    fn from(e: MfccError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<LearnerError> for CliError {
    fn from(e: LearnerError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<CascadeError> for CliError {
    fn from(e: CascadeError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Data(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(CliError::usage("x").exit_code(), 1);
        assert_eq!(CliError::data("x").exit_code(), 2);
        assert_eq!(CliError::internal("x").exit_code(), 3);
    }

    #[test]
    fn display_is_the_bare_message() {
        assert_eq!(CliError::data("manifest.csv: no such file").to_string(), "manifest.csv: no such file");
    }

    #[test]
    fn toolkit_errors_become_data_errors() {
        let e: CliError = LearnerError::EmptyTrainingSet.into();
        assert_eq!(e.exit_code(), 2);
        assert_eq!(e.to_string(), "training set is empty");
    }
}
