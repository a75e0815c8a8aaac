use serde::Serialize;

use super::{CollectionChain, EmitterSpec};

/// Per-node collection and detection probability
/// p_q = P_exc·β·ε_F·T·ε_D·(dΩ/4π).
pub fn collection_prob(emitter: &EmitterSpec, chain: &CollectionChain) -> f64 {
    emitter.p_exc * emitter.branch_sigma * chain.efficiency()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessRate {
    /// P_E = ½·p_A·p_B. The ½ removes same-bin events.
    pub p_e: f64,
    /// P_E·Y·R·f in s⁻¹.
    pub rate_hz: f64,
}

pub fn success_prob_and_rate(p_a: f64, p_b: f64, yield_y: f64, rep_rate_hz: f64, duty: f64) -> SuccessRate {
    let p_e = 0.5 * p_a * p_b;
    SuccessRate {
        p_e,
        rate_hz: p_e * yield_y * rep_rate_hz * duty,
    }
}

/// Probability that one pulse produces two photons: P_exc²·β²·(t_p/8τ_R).
pub fn double_emission_prob(p_exc: f64, branch_sigma: f64, pulse_len_s: f64, tau_r_s: f64) -> f64 {
    p_exc * p_exc * branch_sigma * branch_sigma * pulse_len_s / (8.0 * tau_r_s)
}
