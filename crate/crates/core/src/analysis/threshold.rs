use serde::Serialize;

use super::AnalysisError;

/// P(N ≤ k) for N ~ Poisson(λ), summed in log space.
pub fn poisson_cdf(k: u64, lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let ln_l = lambda.ln();
    let mut ln_term = -lambda;
    let mut ln_max = ln_term;
    let mut terms = Vec::with_capacity(k as usize + 1);
    terms.push(ln_term);
    for i in 1..=k {
        ln_term += ln_l - (i as f64).ln();
        ln_max = ln_max.max(ln_term);
        terms.push(ln_term);
    }
    let s: f64 = terms.iter().map(|t| (t - ln_max).exp()).sum();
    (ln_max + s.ln()).exp().min(1.0)
}

/// Discrimination threshold between bright and dark photon-count histograms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdChoice {
    /// Counts above this half-integer are called bright.
    pub threshold: f64,
    /// Mean misassignment probability with equal priors.
    pub error: f64,
    /// P(bright ion called dark).
    pub error_bright: f64,
    /// P(dark ion called bright).
    pub error_dark: f64,
    /// Equal rates; no threshold separates them.
    pub degenerate: bool,
}

/// Threshold minimizing the mean of both misassignment probabilities.
/// Ties go to the lower threshold.
pub fn optimal_threshold(lambda_bright: f64, lambda_dark: f64) -> Result<ThresholdChoice, AnalysisError> {
    if !(lambda_bright >= 0.0) || !(lambda_dark >= 0.0) || !lambda_bright.is_finite() || !lambda_dark.is_finite() {
        return Err(AnalysisError::InvalidData(format!(
            "count rates must be finite and non-negative, got {lambda_bright} and {lambda_dark}"
        )));
    }
    if lambda_bright < lambda_dark {
        return Err(AnalysisError::InvalidData(format!(
            "bright rate {lambda_bright} is below dark rate {lambda_dark}"
        )));
    }
    if lambda_bright == lambda_dark {
        return Ok(ThresholdChoice {
            threshold: 0.5,
            error: 0.5,
            error_bright: poisson_cdf(0, lambda_bright),
            error_dark: 1.0 - poisson_cdf(0, lambda_dark),
            degenerate: true,
        });
    }
    let k_max = (lambda_bright + 10.0 * lambda_bright.sqrt() + 20.0).ceil() as u64;
    let mut best: Option<ThresholdChoice> = None;
    for k in 0..=k_max {
        let error_bright = poisson_cdf(k, lambda_bright);
        let error_dark = 1.0 - poisson_cdf(k, lambda_dark);
        let error = 0.5 * (error_bright + error_dark);
        if best.is_none_or(|b| error < b.error) {
            best = Some(ThresholdChoice {
                threshold: k as f64 + 0.5,
                error,
                error_bright,
                error_dark,
                degenerate: false,
            });
        }
    }
    Ok(best.expect("at least one candidate"))
}
