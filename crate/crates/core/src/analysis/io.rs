use serde::de::DeserializeOwned;

use super::{AnalysisError, ParityPoint, RamseyPoint};

fn read_rows<T: DeserializeOwned>(text: &str, header: &[&str]) -> Result<Vec<T>, AnalysisError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let got = rdr
        .headers()
        .map_err(|e| AnalysisError::Csv {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(AnalysisError::Csv {
            line: 1,
            message: format!("expected header {}", header.join(",")),
        });
    }
    rdr.deserialize()
        .map(|r| {
            r.map_err(|e| AnalysisError::Csv {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Reads `phase_rad,n_shots,n_odd` rows.
pub fn read_parity_csv(text: &str) -> Result<Vec<ParityPoint>, AnalysisError> {
    read_rows(text, &["phase_rad", "n_shots", "n_odd"])
}

/// Reads `delay_s,amplitude,err` rows.
pub fn read_ramsey_csv(text: &str) -> Result<Vec<RamseyPoint>, AnalysisError> {
    read_rows(text, &["delay_s", "amplitude", "err"])
}
