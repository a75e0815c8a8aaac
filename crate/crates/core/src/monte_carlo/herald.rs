use serde::Serialize;
use std::fmt;

use crate::physics::ProtocolParams;

/// Beamsplitter output port / avalanche photodiode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Detector {
    D0,
    D1,
}

impl Detector {
    pub fn index(self) -> usize {
        match self {
            Detector::D0 => 0,
            Detector::D1 => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Detector::D0
        } else {
            Detector::D1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeBin {
    Early,
    Late,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BellState {
    PsiPlus,
    PsiMinus,
}

impl BellState {
    /// Sign of the parity fringe: +1 for Ψ⁺, −1 for Ψ⁻.
    pub fn parity_sign(self) -> f64 {
        match self {
            BellState::PsiPlus => 1.0,
            BellState::PsiMinus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    /// Both detections in one time bin (or more than one detection in a bin).
    SameBin,
    /// Fewer than one early plus one late detection, or D3/2 leakage.
    MissingPhoton,
    /// |τ* − τ| exceeded the window δt.
    OutOfWindow,
}

/// Classification of one entanglement attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "reason", rename_all = "kebab-case")]
pub enum HeraldResult {
    PsiPlus,
    PsiMinus,
    Rejected(RejectReason),
    ErasureFlagged,
}

impl HeraldResult {
    pub fn bell_state(self) -> Option<BellState> {
        match self {
            HeraldResult::PsiPlus => Some(BellState::PsiPlus),
            HeraldResult::PsiMinus => Some(BellState::PsiMinus),
            _ => None,
        }
    }

    pub fn is_herald(self) -> bool {
        self.bell_state().is_some()
    }
}

impl From<BellState> for HeraldResult {
    fn from(s: BellState) -> Self {
        match s {
            BellState::PsiPlus => HeraldResult::PsiPlus,
            BellState::PsiMinus => HeraldResult::PsiMinus,
        }
    }
}

impl fmt::Display for HeraldResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeraldResult::PsiPlus => f.write_str("psi+"),
            HeraldResult::PsiMinus => f.write_str("psi-"),
            HeraldResult::ErasureFlagged => f.write_str("erasure-flagged"),
            HeraldResult::Rejected(RejectReason::SameBin) => f.write_str("rejected:same-bin"),
            HeraldResult::Rejected(RejectReason::MissingPhoton) => f.write_str("rejected:missing-photon"),
            HeraldResult::Rejected(RejectReason::OutOfWindow) => f.write_str("rejected:out-of-window"),
        }
    }
}

/// Herald rule given one early and one late detection whose interval
/// deviates from nominal by `deviation_s`: same port heralds Ψ⁺, opposite
/// ports Ψ⁻, and |deviation| > δt is rejected.
pub fn herald_from_deviation(early: Detector, late: Detector, deviation_s: f64, delta_t_s: f64) -> HeraldResult {
    if deviation_s.abs() > delta_t_s {
        HeraldResult::Rejected(RejectReason::OutOfWindow)
    } else if early == late {
        HeraldResult::PsiPlus
    } else {
        HeraldResult::PsiMinus
    }
}

/// Herald rule on a measured early→late interval τ*.
pub fn herald_classify(early: Detector, late: Detector, tau_star_s: f64, protocol: &ProtocolParams) -> HeraldResult {
    herald_from_deviation(early, late, tau_star_s - protocol.tau_s, protocol.delta_t_s)
}
