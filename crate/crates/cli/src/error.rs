use autotherm::{Error, ErrorClass};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Model(#[from] Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } => 2,
            CliError::Model(e) => match e.class() {
                ErrorClass::Physics => 3,
                ErrorClass::Numerical => 4,
            },
            CliError::Io(_) => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CliError::Schema { .. } => "SchemaError",
            CliError::Model(e) => e.name(),
            CliError::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
