//! Parameter planning: τ tuning, δt and τ sweeps, error budget and
//! fidelity prediction.

mod budget;
mod predict;
mod sweep;
mod tune;

pub use budget::{compose_error_budget, round_to_sig, BoundKind, BudgetTable, ErrorBudgetEntry, ModelTerm};
pub use predict::{predict_fidelity, FidelityPrediction, PredictedTerm};
pub use sweep::{cooling_levels, sweep_tau, sweep_window, CoolingLevel, SweepCurve, WindowRow, WindowSweep};
pub use tune::{tune_tau, TauTuning};

use thiserror::Error;

use crate::physics::PhysicsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("empty or invalid range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("resolution must be positive, got {0}")]
    InvalidResolution(f64),
    #[error("sweep abscissae must be finite and strictly increasing")]
    UnsortedAbscissae,
    #[error("invalid budget entry {label:?}: {reason}")]
    InvalidEntry { label: String, reason: String },
    #[error(transparent)]
    Physics(#[from] PhysicsError),
}

/// Bell-state parameters the planner assumes for fidelity curves.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BellStateModel {
    pub p_odd: f64,
    /// Contrast before the arrival-time factor.
    pub base_contrast: f64,
}

impl Default for BellStateModel {
    fn default() -> Self {
        Self {
            p_odd: 1.0,
            base_contrast: 1.0,
        }
    }
}
