use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("phase {0} outside [0, 2π]")]
    PhaseDomain(f64),

    #[error("coupling strength {0} outside (0, 1]")]
    Coupling(f64),

    #[error("empty phase set")]
    EmptyPhases,

    #[error("inadmissible degree: {0}")]
    Admissibility(String),

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("topology parse error at line {line}: {msg}")]
    TopologyParse { line: usize, msg: String },

    #[error(
        "geometric graph generation failed after {attempts} attempts \
         (best: min degree {best_min_degree}, connected {best_connected})"
    )]
    Generation {
        attempts: usize,
        best_min_degree: usize,
        best_connected: bool,
    },

    #[error("invalid simulation config: {0}")]
    Config(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("campaign error: {0}")]
    Campaign(String),

    #[error(transparent)]
    Json(#[from] JsonError),

    #[error("io error: {0}")]
    Io(String),
}

/// serde_json errors are not `Clone`; keep the message only.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct JsonError(pub String);

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(JsonError(e.to_string()))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
