use simonovits_core::Error as CoreError;

use crate::io::IoError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NO: i32 = 3;
    pub const INDETERMINATE: i32 = 4;
    pub const GUARD: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("config error: {0}")]
    Config(String),
    #[error("refused by size guard: {0}")]
    Guard(String),
    #[error(transparent)]
    Core(CoreError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("output error: {0}")]
    Output(String),
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::TooLarge(m) => AppError::Guard(m),
            other => AppError::Core(other),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Output(e.to_string())
    }
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => exit::CONFIG,
            AppError::Guard(_) => exit::GUARD,
            _ => exit::FAILURE,
        }
    }
}
