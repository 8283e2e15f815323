//! Case ingestion and result export.

pub mod config;
pub mod export;
pub mod matpower;
pub mod native;

use std::path::Path;

use thiserror::Error;

use crate::grid::Network;
use crate::orderbook::OrderBook;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("cannot read `{path}`: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("unknown case format for `{0}` (expected .toml or .m)")]
    UnknownFormat(String),
    #[error("{0}")]
    Invalid(String),
}

/// Case file format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CaseFormat {
    /// Choose by file extension: `.toml` native, `.m` MATPOWER-style.
    #[default]
    Auto,
    Native,
    Matpower,
}

/// Reads a case file into a network and order book using the given import
/// options. The result is validated; importer output that fails validation
/// is reported as an error.
pub fn import_case(
    path: &Path,
    format: CaseFormat,
    options: &config::ImportOptions,
) -> Result<(Network, OrderBook), IoError> {
    let chosen = match format {
        CaseFormat::Auto => match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => CaseFormat::Native,
            Some("m") => CaseFormat::Matpower,
            _ => return Err(IoError::UnknownFormat(path.display().to_string())),
        },
        other => other,
    };
    let (net, ob) = match chosen {
        CaseFormat::Native => native::read_case(path)?,
        CaseFormat::Matpower => matpower::read_case(path, options)?,
        CaseFormat::Auto => unreachable!("resolved above"),
    };
    let report = crate::validate::validate_all(&net, &ob);
    if !report.is_valid() {
        return Err(IoError::Invalid(format!(
            "`{}` imported but failed validation:\n{report}",
            path.display()
        )));
    }
    Ok((net, ob))
}
