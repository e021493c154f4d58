use qha_core::QhaError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("{experiment}: {source}")]
    Experiment {
        experiment: String,
        #[source]
        source: QhaError,
    },
}

impl CliError {
    pub fn config(path: &str, message: impl Into<String>) -> Self {
        CliError::Config { path: path.to_string(), message: message.into() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches the experiment name to core errors.
pub trait Context<T> {
    fn during(self, experiment: &str) -> CliResult<T>;
}

impl<T> Context<T> for qha_core::Result<T> {
    fn during(self, experiment: &str) -> CliResult<T> {
        self.map_err(|source| CliError::Experiment { experiment: experiment.to_string(), source })
    }
}
