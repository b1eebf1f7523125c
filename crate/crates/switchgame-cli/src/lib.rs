//! File formats and subcommands behind the `switchgame` binary.
//!
//! Every command reads a JSON problem file and writes CSV artifacts into an
//! output directory. Numbers are written as `{:.16e}` (17 significant
//! digits) with LF line endings, so equal runs give byte-identical files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod solution_file;
pub mod spec_file;

use std::path::Path;

/// Process exit status of a command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    InvalidInput = 1,
    Classification = 2,
    VerifyFailed = 3,
}

/// A failed command.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid spec:\n{0}")]
    InvalidSpec(String),
    #[error("invalid arguments: {0}")]
    Args(String),
    #[error("{0}")]
    Io(String),
    #[error("cannot build a solution: {0}")]
    Classification(String),
    #[error("unreadable solution file: {0}")]
    BadSolution(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    /// Exit status for this error.
    pub fn exit(&self) -> Exit {
        match self {
            CliError::InvalidSpec(_) | CliError::Args(_) | CliError::Io(_) => Exit::InvalidInput,
            CliError::Classification(_) => Exit::Classification,
            CliError::BadSolution(_) | CliError::VerifyFailed(_) => Exit::VerifyFailed,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Full-precision scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `num`, or an empty field for `None`.
pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Writes a CSV file with a header row and LF line endings.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| io_err(path, e))
}
