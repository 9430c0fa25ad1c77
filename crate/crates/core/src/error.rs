use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("no remaining candidates")]
    NoRemainingCandidates,

    #[error("empty election")]
    EmptyElection,

    #[error("candidate count {0} outside the supported range 1..=128")]
    CandidateCount(usize),

    #[error("candidate {candidate} out of range for {m} candidates")]
    CandidateOutOfRange { candidate: usize, m: usize },

    #[error("invalid ballot: {0}")]
    InvalidBallot(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("enumeration refused: {m} candidates exceeds the cap of {cap}")]
    EnumerationCap { m: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("trial {trial} at m={m}, n={n}: {source}")]
    Trial {
        m: usize,
        n: usize,
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("witness check failed at m={m}, n={n}, trial {trial}")]
    WitnessRejected { m: usize, n: usize, trial: usize },

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
