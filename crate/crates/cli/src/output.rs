use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Flat rows as CSV with a header, or as a JSON array.
pub fn rows<T: Serialize>(items: &[T], format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for item in items {
                w.serialize(item).map_err(|e| CliError::Other(format!("CSV encoding failed: {e}")))?;
            }
            w.into_inner().map_err(|e| CliError::Other(e.to_string()))
        }
        Format::Json => json(&items),
    }
}

/// One flat record: a one-row CSV, or a JSON object.
pub fn record<T: Serialize>(item: &T, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => rows(std::slice::from_ref(item), format),
        Format::Json => json(item),
    }
}

pub fn json<T: Serialize + ?Sized>(item: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(item).map_err(|e| CliError::Other(format!("JSON encoding failed: {e}")))?;
    v.push(b'\n');
    Ok(v)
}

/// Writes the primary artifact to `out`, or to stdout.
pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Io(path.display().to_string(), e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io("stdout".into(), e))
        }
    }
}
