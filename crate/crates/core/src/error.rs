use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller violated an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("operation `{op}` is not supported by instance `{instance}`")]
    Unsupported { instance: String, op: &'static str },

    #[error("unknown instance `{0}`")]
    UnknownInstance(String),

    #[error("invalid instance parameters: {0}")]
    InvalidParams(String),

    #[error("invalid control: {0}")]
    InvalidControl(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// The piece's L1 mass exceeds the admissible epsilon; the caller must subdivide.
    #[error("control mass {mass:.6e} exceeds admissible epsilon {epsilon:.6e}")]
    NonContraction { mass: f64, epsilon: f64 },

    #[error("Picard iteration did not converge after {iterations} iterations (last change {last_change:.3e})")]
    NoConvergence { iterations: usize, last_change: f64 },

    #[error(
        "iterate {iteration} left the trust ball: distance {distance:.6e} > radius {radius:.6e}"
    )]
    TrustBallExit {
        iteration: usize,
        distance: f64,
        radius: f64,
    },

    #[error("non-finite estimate: {0}")]
    NonFinite(String),

    #[error("piece {index}: {source}")]
    Piece {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Machine-readable tag, used by the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Contract(_) => "contract",
            Error::Unsupported { .. } => "unsupported",
            Error::UnknownInstance(_) => "unknown_instance",
            Error::InvalidParams(_) => "invalid_params",
            Error::InvalidControl(_) => "invalid_control",
            Error::Parse(_) => "parse",
            Error::NonContraction { .. } => "non_contraction",
            Error::NoConvergence { .. } => "no_convergence",
            Error::TrustBallExit { .. } => "trust_ball_exit",
            Error::NonFinite(_) => "non_finite",
            Error::Piece { source, .. } => source.kind(),
        }
    }

    /// Strips piece wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Piece { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn in_piece(self, index: usize) -> Error {
        Error::Piece {
            index,
            source: Box::new(self),
        }
    }
}
