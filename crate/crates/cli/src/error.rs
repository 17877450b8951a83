use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },

    #[error("ParseError at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("ParseError at {field}: {message}")]
    Field { field: String, message: String },

    #[error("SchemaError at {field}: {message}")]
    Schema { field: String, message: String },

    #[error("KindMismatch: {command} needs a {expected} scenario, found {found}")]
    KindMismatch { command: String, expected: String, found: String },

    #[error("UnsupportedKind: {0}")]
    UnsupportedKind(String),

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("{0}")]
    Input(chrono_reverse::Error),

    #[error("numerical failure: {0}")]
    Numerical(chrono_reverse::Error),
}

impl CliError {
    pub fn schema(field: impl Into<String>, message: impl ToString) -> Self {
        CliError::Schema { field: field.into(), message: message.to_string() }
    }

    /// 2 for anything caused by the input, 3 for numerical breakdowns.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

impl From<chrono_reverse::Error> for CliError {
    fn from(e: chrono_reverse::Error) -> Self {
        use chrono_reverse::Error as E;
        match e {
            E::SingularSigma { .. }
            | E::SingularState { .. }
            | E::SingularProcess { .. }
            | E::NotPsd { .. }
            | E::NotHermitian { .. }
            | E::NotReversalShaped { .. }
            | E::CompletenessViolation { .. }
            | E::NotTracePreserving { .. } => CliError::Numerical(e),
            other => CliError::Input(other),
        }
    }
}
