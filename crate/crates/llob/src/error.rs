use std::path::PathBuf;

use thiserror::Error;

/// Failures of a command, each mapped to a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("schema error in {path}: {} offending row(s)\n{}", rows.len(), format_rows(rows))]
    Schema { path: PathBuf, rows: Vec<(usize, String)> },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("solver error: {0}")]
    Solver(llob_core::Error),

    #[error("statistical failure: {0}")]
    Statistical(llob_core::Error),
}

const SHOWN_ROWS: usize = 20;

fn format_rows(rows: &[(usize, String)]) -> String {
    let mut out: Vec<String> = rows.iter().take(SHOWN_ROWS).map(|(line, msg)| format!("  line {line}: {msg}")).collect();
    if rows.len() > SHOWN_ROWS {
        out.push(format!("  ... and {} more", rows.len() - SHOWN_ROWS));
    }
    out.join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Schema { .. } | CliError::Io { .. } => 2,
            CliError::Solver(_) => 3,
            CliError::Statistical(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// Errors caught by precondition checks are config errors; everything
    /// else raised while solving is a solver error.
    pub(crate) fn solver(err: llob_core::Error) -> CliError {
        use llob_core::Error as E;
        match err {
            E::InvalidParameter { .. } | E::GridTooSmall { .. } | E::UnstableTimeStep { .. } => {
                CliError::Config(err.to_string())
            }
            other => CliError::Solver(other),
        }
    }

    pub(crate) fn statistical(err: llob_core::Error) -> CliError {
        match err {
            llob_core::Error::InvalidParameter { .. } => CliError::Config(err.to_string()),
            other => CliError::Statistical(other),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
