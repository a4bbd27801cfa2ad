use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid diagnosis problem: {0}")]
    InvalidDpi(String),

    #[error("unknown sentence id {0}")]
    UnknownSentence(u32),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("time budget exhausted after {found} diagnoses")]
    Budget { found: usize },

    #[error("session: {0}")]
    Session(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
