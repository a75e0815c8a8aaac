use serde::Serialize;

use super::{canonical_order, window_stats, CoherenceReport, ModeAxis, NodeId, TrapMode};

/// Time-bin separation factor
/// C′ = Π exp[−η²(2n̄+1)(1 − cos ωτ)]
/// and the per-mode zero-point phases η²·sin ωτ (canonical order).
pub fn contrast_timebin(modes: &[TrapMode], tau_s: f64) -> (f64, Vec<f64>) {
    let mut c = 1.0;
    let mut phases = Vec::with_capacity(modes.len());
    for m in canonical_order(modes) {
        let wt = m.omega() * tau_s;
        let eta2 = m.eta * m.eta;
        c *= (-eta2 * (2.0 * m.nbar + 1.0) * (1.0 - wt.cos())).exp();
        phases.push(eta2 * wt.sin());
    }
    (c, phases)
}

/// Arrival-time factor in the ωτ_R ≪ 1 Gaussian approximation
/// C″ ≈ Π exp[−ζ²(2n̄+1)·W·ω²τ_R²].
pub fn contrast_arrival(modes: &[TrapMode], tau_r_s: f64, big_w: f64) -> f64 {
    let exponent: f64 = canonical_order(modes)
        .into_iter()
        .map(|m| {
            let wr = m.omega() * tau_r_s;
            m.zeta * m.zeta * (2.0 * m.nbar + 1.0) * big_w * wr * wr
        })
        .sum();
    (-exponent).exp()
}

/// Bell-state fidelity from odd-parity population and parity contrast.
pub fn bell_fidelity(p_odd: f64, contrast: f64) -> f64 {
    0.5 * (p_odd + contrast)
}

/// C′, C″ and their product for a protocol window.
pub fn coherence_report(modes: &[TrapMode], tau_s: f64, delta_t_s: f64, tau_r_s: f64) -> CoherenceReport {
    let (c_timebin, phase_offsets) = contrast_timebin(modes, tau_s);
    let ws = window_stats(delta_t_s, tau_r_s);
    let c_arrival = contrast_arrival(modes, tau_r_s, ws.big_w);
    CoherenceReport {
        c_timebin,
        c_arrival,
        c_total: c_timebin * c_arrival,
        phase_offsets,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Commensurability {
    pub node: NodeId,
    pub axis: ModeAxis,
    pub freq_hz: f64,
    /// ωτ/2π.
    pub cycles: f64,
    /// Distance of ωτ/2π to the nearest integer.
    pub residual: f64,
}

/// Number of motional periods per time-bin separation for each mode.
pub fn commensurability(modes: &[TrapMode], tau_s: f64) -> Vec<Commensurability> {
    canonical_order(modes)
        .into_iter()
        .map(|m| {
            let cycles = m.freq_hz * tau_s;
            Commensurability {
                node: m.node,
                axis: m.axis,
                freq_hz: m.freq_hz,
                cycles,
                residual: (cycles - cycles.round()).abs(),
            }
        })
        .collect()
}
