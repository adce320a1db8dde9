use thiserror::Error;

/// Errors raised by library operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arithmetic overflow")]
    Overflow,
    #[error("more than {cap} simultaneously active slave automata at position {position}")]
    WidthExceeded { position: usize, cap: usize },
    #[error("input is not deterministic: {0}")]
    Nondeterministic(String),
    #[error("malformed automaton: {0}")]
    Malformed(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("exploration exceeded the cap of {cap} configurations")]
    CapExceeded { cap: usize },
    #[error("fragment ({from}, {letter}, {to}, slave {slave}) has unbounded negative value")]
    NegInfinityFragment {
        from: String,
        letter: String,
        to: String,
        slave: usize,
    },
    #[error("line {line}, column {col}: expected {expected}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::Overflow)
}
