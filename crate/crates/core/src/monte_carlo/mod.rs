//! Stochastic attempt engine and numerical oracles.
//!
//! Interference at the beamsplitter is modeled at the outcome level: which
//! bin and which output port each photon reaches is drawn with ideal
//! Hong–Ou–Mandel statistics, and coherence is attached afterwards through
//! sampled motional phases ([`motion`]) when synthesizing tomography data.

mod arrival;
mod engine;
mod events;
mod fock;
mod herald;
mod motion;
mod tomography;

pub use arrival::{sample_arrival_diff, TruncatedLaplace};
pub use engine::{
    expected_herald_probability, run, simulate_attempt, worker_rng, AttemptOutcome, DecayBranch,
    Detection, DetectionSource, HeraldOrigin, NodeOutcome, RunOptions, RunOutput, RunTally,
    TallySummary,
};
pub use events::{EventTiming, EventTimingError};
pub use fock::{motional_coherence_fock, required_fock_cutoff, FockError};
pub use herald::{herald_classify, herald_from_deviation, BellState, Detector, HeraldResult, RejectReason, TimeBin};
pub use motion::{
    arrival_coherence_sampled, motional_coherence_sampled, thermal_amplitude, KickKind,
    MotionalSample,
};
pub use tomography::{
    synthesize_tomography, tomography_from_heralds, HeraldEvent, StateData, TomographyData,
    TomographyModel,
};

use serde::Serialize;

/// Noise and imperfection knobs of the attempt engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseParams {
    /// Relative rms of qubit rotation angles (0.01 = 1 %).
    pub pulse_angle_rms: f64,
    /// Uniform dark-count rate per detector.
    pub dark_count_rate_hz: f64,
    /// Per-bin detection gate over which dark counts can land.
    pub detection_gate_s: f64,
    /// Fidelity error from imperfect photon wavepacket overlap; the
    /// corresponding parity contrast factor is 1 − 2·error.
    pub wavepacket_overlap_error: f64,
    /// Shelve/de-shelve erasure check enabled.
    pub veto_enabled: bool,
    /// Probability that the erasure check misses a wrong-ground-state ion.
    pub veto_miss_prob: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            pulse_angle_rms: 0.0,
            dark_count_rate_hz: 0.0,
            detection_gate_s: 100e-9,
            wavepacket_overlap_error: 0.0,
            veto_enabled: true,
            veto_miss_prob: 0.0,
        }
    }
}

impl NoiseParams {
    /// Probability of at least one dark count on one detector during one gate.
    pub fn dark_count_prob(&self) -> f64 {
        -(-self.dark_count_rate_hz * self.detection_gate_s).exp_m1()
    }
}
