use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed fact: {0}")]
    MalformedFact(String),
    #[error("search budget exceeded: {0}")]
    SearchBudget(String),
    #[error("functor ill-formed: both signs of atom {atom} enumerated")]
    FunctorIllFormed { atom: String },
    #[error("interpretation ill-formed: tuple code {code} certified both in and out of the domain")]
    InterpretationIllFormed { code: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{file}:{line}: {msg}")]
    Parse { file: String, line: usize, msg: String },
    #[error("expected a {expected} artifact, found {found}")]
    KindMismatch { expected: String, found: String },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
