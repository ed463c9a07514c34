use std::fmt;
use std::process::ExitCode;

use ilb_evolve::Error;

/// Why a command stopped; each variant owns one exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Parse(String),
    Solver(Error),
    ChecksFailed(usize),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Solver(_) => 3,
            Failure::ChecksFailed(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Parse(_) => "parse",
            Failure::Solver(e) => e.kind(),
            Failure::ChecksFailed(_) => "checks_failed",
        }
    }

    pub fn to_json(&self) -> String {
        let mut body = serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.code(),
        });
        if let Failure::Solver(Error::Piece { index, .. }) = self {
            body["piece"] = (*index).into();
        }
        body.to_string()
    }

    pub fn report(self) -> ExitCode {
        eprintln!("{}", self.to_json());
        ExitCode::from(self.code())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Parse(m) => f.write_str(m),
            Failure::Solver(e) => write!(f, "{e}"),
            Failure::ChecksFailed(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e.root() {
            Error::Parse(m) => Failure::Parse(m.clone()),
            Error::UnknownInstance(_)
            | Error::InvalidParams(_)
            | Error::InvalidControl(_)
            | Error::Contract(_)
            | Error::Unsupported { .. } => Failure::Usage(e.to_string()),
            Error::NonContraction { .. }
            | Error::NoConvergence { .. }
            | Error::TrustBallExit { .. }
            | Error::NonFinite(_)
            | Error::Piece { .. } => Failure::Solver(e),
        }
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;
