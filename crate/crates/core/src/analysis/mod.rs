//! Estimators for tomography and readout data.

mod fringe;
mod io;
mod population;
mod ramsey;
mod stats;
mod threshold;

pub use fringe::{fit_parity, FringeFit, OffsetMode, ParityFitOptions, ParityPoint};
pub use io::{read_parity_csv, read_ramsey_csv};
pub use population::{bell_fidelity_est, odd_population, Estimate, PopulationCounts};
pub use ramsey::{fit_ramsey, RamseyFit, RamseyOptions, RamseyPoint};
pub use stats::{kolmogorov_pvalue, ks_statistic};
pub use threshold::{optimal_threshold, poisson_cdf, ThresholdChoice};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("need at least {needed} usable points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("phases cover {span_rad:.3} rad with {distinct} distinct values; need at least 4 values spanning pi")]
    InsufficientPhaseCoverage { distinct: usize, span_rad: f64 },
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("fit did not converge: {0}")]
    NoConvergence(String),
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: u64, message: String },
}
