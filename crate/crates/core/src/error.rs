use thiserror::Error;

use crate::syntax::CalcId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sort error at {path}: {reason}")]
pub struct SortError {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {line}:{col}: expected {expected}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("definition `{0}` is declared twice")]
    DuplicateDef(String),
    #[error("definition `{name}` has free variables: {vars}")]
    OpenTerm { name: String, vars: String },
    #[error("term is an abstraction, not a process")]
    NotAProcess,
    #[error("operation is not available in calculus {calc}: {reason}")]
    UnsupportedCalculus { calc: CalcId, reason: String },
    #[error("unknown claim `{0}`")]
    UnknownClaim(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
