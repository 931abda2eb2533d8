use std::path::PathBuf;

use crate::rdf::Term;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{term} is not allowed in {position} position")]
    InvalidTriple { position: &'static str, term: String },

    #[error("blank node label must not be empty")]
    EmptyBlankLabel,

    #[error("literal cannot carry both a datatype and a language tag")]
    LiteralAnnotation,

    #[error("{0} is not a blank node")]
    NotABlankNode(Term),

    #[error("{0} is a blank node; URI equivalence covers IRIs and literals only")]
    BlankInEquivalence(Term),

    #[error("renaming cannot involve literal {0}")]
    LiteralInRenaming(Term),

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("mapping is not injective: {0} has two preimages")]
    NotInjective(String),

    #[error("mapping refers to {0}, which is not a blank node of the source graph")]
    ForeignBlankNode(String),

    #[error("instance too large for exhaustive search: {left} x {right} blank nodes (limit {limit})")]
    InstanceTooLarge { left: usize, right: usize, limit: usize },

    #[error("search budget of {0} nodes exhausted")]
    BudgetExhausted(u64),

    #[error("infeasible generator spec: {0}")]
    InfeasibleSpec(String),

    #[error("version {index} out of range 1..={count}")]
    VersionOutOfRange { index: usize, count: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Repository { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            message: message.into(),
        }
    }
}
