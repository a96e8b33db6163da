use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("{0}")]
    Numerical(String),
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    exit_code: i32,
    message: String,
}

impl CliError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::UnknownExperiment(_) => 3,
            CliError::InvalidConfig(_) => 4,
            CliError::UnsupportedRegime(_) => 5,
            CliError::Io { .. } => 6,
            CliError::VerificationFailed(_) => 7,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::UnknownExperiment(_) => "unknown-experiment",
            CliError::InvalidConfig(_) => "invalid-config",
            CliError::UnsupportedRegime(_) => "unsupported-regime",
            CliError::Io { .. } => "io",
            CliError::VerificationFailed(_) => "verification-failed",
            CliError::Numerical(_) => "numerical",
        }
    }

    /// One-line JSON object for stderr.
    pub fn to_json(&self) -> String {
        let body = ErrorJson { error: self.kind(), exit_code: self.exit_code(), message: self.to_string() };
        serde_json::to_string(&body).unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.kind()))
    }
}

impl From<collapse_core::Error> for CliError {
    fn from(e: collapse_core::Error) -> Self {
        use collapse_core::Error as E;
        match e {
            E::UnsupportedRegime(m) => CliError::UnsupportedRegime(m),
            E::ParameterDomain(m) | E::InvalidGrid(m) => CliError::InvalidConfig(m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}
