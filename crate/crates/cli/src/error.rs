use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{flag}: {message}")]
    Usage { flag: String, message: String },

    #[error(transparent)]
    Core(#[from] kpspin_core::Error),

    #[error("cannot write {target}: {source}")]
    Output { target: String, source: std::io::Error },

    #[error("cannot encode output: {0}")]
    Encode(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage { .. } => 2,
            _ => 1,
        }
    }

    fn kind(&self) -> &'static str {
        use kpspin_core::Error as E;
        match self {
            CliError::Usage { .. } => "usage",
            CliError::Output { .. } => "output",
            CliError::Encode(_) => "encode",
            CliError::Core(e) => match e {
                E::InvalidParameter(_) => "invalid-parameter",
                E::NotAFixedPoint { .. } => "not-a-fixed-point",
                E::EigenResidual { .. } => "eigen-residual",
                E::Linalg(_) => "linalg",
                E::ParityViolation { .. } => "parity-violation",
                E::Unnormalized { .. } => "unnormalized",
                E::TooFewSpacings { .. } => "too-few-spacings",
                E::VersionMismatch { .. } => "version-mismatch",
                E::Corrupt(_) => "corrupt",
                E::SpecMismatch => "spec-mismatch",
                E::Io(_) => "io",
            },
        }
    }

    /// One-line JSON record for the error stream.
    pub fn record(&self) -> String {
        let mut err = json!({ "kind": self.kind(), "message": self.to_string() });
        if let CliError::Usage { flag, .. } = self {
            err["flag"] = json!(flag);
        }
        json!({ "error": err }).to_string()
    }
}

/// Everything that stops a run before output is written.
#[derive(Debug)]
pub enum Failure {
    /// Argument parsing, including help and version requests.
    Clap(clap::Error),
    Cli(CliError),
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        Failure::Cli(e)
    }
}
