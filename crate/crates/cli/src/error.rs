use thiserror::Error;

/// Errors that end the process with exit code 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", at(None, .line, .message))]
    Input { line: Option<usize>, message: String },
    #[error("{}", at(Some(.path), .line, .message))]
    InputAt {
        path: String,
        line: Option<usize>,
        message: String,
    },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

fn at(path: Option<&String>, line: &Option<usize>, message: &str) -> String {
    match (path, line) {
        (Some(p), Some(l)) => format!("{p}:{l}: {message}"),
        (Some(p), None) => format!("{p}: {message}"),
        (None, Some(l)) => format!("line {l}: {message}"),
        (None, None) => message.to_string(),
    }
}

impl CliError {
    pub const EXIT_CODE: i32 = 2;

    pub fn with_path(self, path: &std::path::Path) -> CliError {
        match self {
            CliError::Input { line, message } => CliError::InputAt {
                path: path.display().to_string(),
                line,
                message,
            },
            other => other,
        }
    }
}

impl From<rm_auctions::AuctionError> for CliError {
    fn from(e: rm_auctions::AuctionError) -> Self {
        CliError::Usage(e.to_string())
    }
}
