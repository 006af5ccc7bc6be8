use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unknown qudit {0}")]
    UnknownQudit(u32),
    #[error("matrix is not unitary: {0}")]
    NotUnitary(String),
    #[error("vector is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("impossible branch: {0}")]
    ImpossibleBranch(String),
    #[error("qudit {0} is entangled and cannot be released")]
    Entangled(u32),
    #[error("invalid lattice: {0}")]
    Lattice(String),
    #[error("invalid ribbon: {0}")]
    Ribbon(String),
    #[error("register limit exceeded: {0}")]
    TooLarge(String),
    #[error("program error: {0}")]
    Program(String),
}

pub type Result<T> = std::result::Result<T, Error>;
