use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Library(#[from] torus_ym::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },

    /// The run reached a blow-up; its manifest has been written.
    #[error("numerical blow-up: {0}")]
    BlowUp(String),

    #[error("verification failed in suite '{suite}': {message}")]
    Verification { suite: String, message: String },
}

impl CliError {
    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Config(_) | Self::Library(_) | Self::Io { .. } => 1,
            Self::BlowUp(_) => 2,
            Self::Verification { .. } => 3,
        })
    }
}
