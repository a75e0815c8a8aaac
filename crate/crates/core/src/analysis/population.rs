use serde::{Deserialize, Serialize};

use super::{AnalysisError, FringeFit};

/// Single-shot population measurements of the two-ion state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopulationCounts {
    pub n_shots: u64,
    /// Shots with anti-aligned spins (↑↓ or ↓↑).
    pub n_odd: u64,
}

/// Value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

/// Binomial estimate of P_↑↓ + P_↓↑.
pub fn odd_population(counts: &PopulationCounts) -> Result<Estimate, AnalysisError> {
    if counts.n_shots == 0 {
        return Err(AnalysisError::TooFewPoints { needed: 1, got: 0 });
    }
    if counts.n_odd > counts.n_shots {
        return Err(AnalysisError::InvalidData(format!(
            "{} odd outcomes in {} shots",
            counts.n_odd, counts.n_shots
        )));
    }
    let n = counts.n_shots as f64;
    let p = counts.n_odd as f64 / n;
    Ok(Estimate {
        value: p,
        std_err: (p * (1.0 - p) / n).sqrt(),
    })
}

/// F = (P_odd + C)/2 with independent errors added in quadrature.
pub fn bell_fidelity_est(p_odd: &Estimate, fringe: &FringeFit) -> Estimate {
    Estimate {
        value: 0.5 * (p_odd.value + fringe.contrast),
        std_err: 0.5 * p_odd.std_err.hypot(fringe.contrast_se),
    }
}
