use polar_maass::analysis::AnalysisError;
use polar_maass::arith::ArithError;
use polar_maass::continuation::ContinuationError;
use polar_maass::pairing::PairingError;
use polar_maass::poincarebasis::BasisError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("spec parse error at line {line}, column {column}: {message}")]
    SpecParse { line: usize, column: usize, message: String },
    #[error("unsupported level {0}")]
    UnsupportedLevel(u64),
    #[error("unknown suite '{0}' (expected kloosterman, continuation, basis, pairing or all)")]
    UnknownSuite(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Continuation(#[from] ContinuationError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for usage and input errors, 3 for numeric guards, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Basis(BasisError::PoleHit(_))
            | CliError::Basis(BasisError::Continuation(ContinuationError::PoleHit(_)))
            | CliError::Continuation(ContinuationError::PoleHit(_))
            | CliError::Analysis(AnalysisError::IllConditioned(_))
            | CliError::Analysis(AnalysisError::ContourHitsPole(_))
            | CliError::Pairing(PairingError::Basis(BasisError::PoleHit(_))) => 3,
            CliError::SpecParse { .. }
            | CliError::UnsupportedLevel(_)
            | CliError::UnknownSuite(_)
            | CliError::InvalidConfig(_)
            | CliError::Io { .. }
            | CliError::Arith(_)
            | CliError::Basis(BasisError::InvalidSpec(_))
            | CliError::Basis(BasisError::InvalidInput(_))
            | CliError::Basis(BasisError::CongruenceViolation { .. })
            | CliError::Pairing(PairingError::UnsupportedLevel(_))
            | CliError::Pairing(PairingError::UnsupportedWeight(_))
            | CliError::Pairing(PairingError::InvalidInput(_)) => 2,
            _ => 1,
        }
    }
}
