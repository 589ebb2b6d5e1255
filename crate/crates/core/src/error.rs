use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("element {element} lies outside the ground set of size {n}")]
    ElementOutOfRange { element: usize, n: usize },

    #[error("families live on different ground sets ({left} vs {right})")]
    GroundMismatch { left: usize, right: usize },

    #[error("family is not a subfamily of the ambient family")]
    NotSubfamily,

    #[error("family is not uniform")]
    NotUniform,

    #[error("family is empty")]
    EmptyFamily,

    #[error("family is not {t}-intersecting")]
    NotTIntersecting { t: usize },

    #[error("family contains the empty set, so no cover exists")]
    EmptyMember,

    #[error("slice requires X to be a subset of Y")]
    SliceNotNested,

    #[error("not a permutation: {0}")]
    InvalidPermutation(String),

    #[error("{what}: budget of {budget} exhausted")]
    BudgetExceeded { what: &'static str, budget: u64 },

    #[error("{path}:{line}:{column}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("{path}: field `{field}`: {msg}")]
    Field {
        path: PathBuf,
        field: String,
        msg: String,
    },

    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
