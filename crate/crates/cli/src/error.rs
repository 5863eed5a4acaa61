use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown key `{key}` at line {line}")]
    UnknownKey { key: String, line: usize },
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("empty configuration")]
    EmptyConfig,
    #[error("output contains a non-finite value in `{file}`")]
    NonFinite { file: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Math(#[from] maxreg::Error),
}

impl CliError {
    /// 2 for mathematical failure modes, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Math(e) if e.is_mathematical() => 2,
            _ => 1,
        }
    }
}
