use ruin_adjust_core::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ESTIMATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{context}: {message}")]
    Io { context: String, message: String },
}

impl CliError {
    pub fn io(context: impl Into<String>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            context: context.into(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => core_exit_code(e),
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

pub fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::InvalidParameter(_) => EXIT_USAGE,
        _ => EXIT_ESTIMATION,
    }
}

/// Stable machine-readable name of a core error.
pub fn error_kind(e: &CoreError) -> &'static str {
    match e {
        CoreError::InvalidParameter(_) => "invalid_parameter",
        CoreError::Infeasible(_) => "infeasible",
        CoreError::Unbounded { .. } => "unbounded",
        CoreError::Existence(_) => "existence",
        CoreError::NoNegativeDip { .. } => "no_negative_dip",
        CoreError::NoSignChange { .. } => "no_sign_change",
        CoreError::NonFinite { .. } => "non_finite",
    }
}
