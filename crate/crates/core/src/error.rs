use crate::Id;
use thiserror::Error;

/// Domain errors. The variant name doubles as the machine-readable error
/// code forwarded over the session protocol (see [`Error::code`]).
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("stroke rejected: {0}")]
    RejectedStroke(String),
    #[error("malformed document at line {line}, column {column}: {message}")]
    FormatError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported format version {found} (expected {expected})")]
    VersionError { found: u64, expected: u64 },
    #[error("stroke {0} is ink, not a gesture")]
    NotAGesture(Id),
    #[error("gesture {gesture} touches {count} links; a joint needs exactly 2")]
    AmbiguousJoint { gesture: Id, count: usize },
    #[error("gesture {0} is neither a circle nor a line")]
    UnrecognizedGesture(Id),
    #[error("unknown {kind} {id}")]
    UnknownEntity { kind: &'static str, id: Id },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("link {link} would have coincident anchors")]
    DegenerateLink { link: Id },
    #[error("mechanism has mobility {mobility} but {drivers} driver(s)")]
    Underdriven { mobility: i64, drivers: usize },
    #[error("mechanism has mobility {mobility} but {drivers} driver(s)")]
    Overdriven { mobility: i64, drivers: usize },
    #[error("mechanism {0} has no ground link")]
    NoGround(Id),
    #[error("mechanism is a structure (mobility {0})")]
    Structure(i64),
    #[error("could not re-assemble mechanism after edit (residual {residual:.3e})")]
    AssemblyFailed { residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::RejectedStroke(_) => "RejectedStroke",
            Error::FormatError { .. } => "FormatError",
            Error::VersionError { .. } => "VersionError",
            Error::NotAGesture(_) => "NotAGesture",
            Error::AmbiguousJoint { .. } => "AmbiguousJoint",
            Error::UnrecognizedGesture(_) => "UnrecognizedGesture",
            Error::UnknownEntity { .. } => "UnknownEntity",
            Error::InvalidInput(_) => "InvalidInput",
            Error::DegenerateLink { .. } => "DegenerateLink",
            Error::Underdriven { .. } => "Underdriven",
            Error::Overdriven { .. } => "Overdriven",
            Error::NoGround(_) => "NoGround",
            Error::Structure(_) => "Structure",
            Error::AssemblyFailed { .. } => "AssemblyFailed",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Io(_) => "Io",
        }
    }

    pub(crate) fn unknown(kind: &'static str, id: Id) -> Self {
        Error::UnknownEntity { kind, id }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
