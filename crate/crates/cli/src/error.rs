use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] polarlab::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: malformed JSON: {source}", path.display())]
    Parse { path: PathBuf, source: serde_json::Error },

    #[error("{0}")]
    Usage(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// 1 for invalid input, 2 for alphabet blow-up, 3 for failed verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(polarlab::Error::AlphabetBlowUp { .. }) => 2,
            CliError::VerificationFailed(_) => 3,
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let blow = polarlab::Error::AlphabetBlowUp { size: 10, cap: 5, prefix: None };
        assert_eq!(CliError::Lib(blow).exit_code(), 2);
        assert_eq!(CliError::VerificationFailed("closure".into()).exit_code(), 3);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Lib(polarlab::Error::InvalidParameter("x".into())).exit_code(), 1);
    }
}
