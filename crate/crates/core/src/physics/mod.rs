//! Closed-form physics of the time-bin link.
//!
//! Everything here is a pure function over immutable value types. Angles are
//! degrees at the interface and radians internally. Products over motional
//! modes always run in the canonical order returned by [`canonical_order`]
//! (node A before B, axes z, x, y) so results are bit-reproducible no matter
//! how the caller ordered its mode list.

mod contrast;
mod geometry;
mod rate;
mod window;

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::constants::{ATOMIC_MASS_UNIT, BA138_MASS_U, BA_EMISSION_WAVELENGTH_M, DEFAULT_TAU_R_S};

pub use contrast::{
    bell_fidelity, coherence_report, commensurability, contrast_arrival, contrast_timebin,
    Commensurability,
};
pub use geometry::{
    derive_beam_angles, doppler_nbar, recoil_params, DopplerSettings, RecoilParams,
};
pub use rate::{collection_prob, double_emission_prob, success_prob_and_rate, SuccessRate};
pub use window::window_stats;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("mode frequency must be positive, got {0} Hz")]
    NonPositiveFrequency(f64),
    #[error("uncooled axis: cooling beam is perpendicular to the axis (theta = {theta_deg} deg)")]
    UncooledAxis { theta_deg: f64 },
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<(), PhysicsError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(PhysicsError::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<(), PhysicsError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(PhysicsError::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeId {
    A,
    B,
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::A => f.write_str("A"),
            NodeId::B => f.write_str("B"),
        }
    }
}

/// Principal trap axis. `Ord` follows the canonical product order z, x, y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeAxis {
    Z,
    X,
    Y,
}

impl ModeAxis {
    pub const ALL: [ModeAxis; 3] = [ModeAxis::Z, ModeAxis::X, ModeAxis::Y];
}

impl fmt::Display for ModeAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeAxis::X => f.write_str("x"),
            ModeAxis::Y => f.write_str("y"),
            ModeAxis::Z => f.write_str("z"),
        }
    }
}

/// Emitter constants of one ion species and its excitation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmitterSpec {
    pub mass_kg: f64,
    pub wavelength_m: f64,
    /// Radiative lifetime τ_R of the excited state.
    pub tau_r_s: f64,
    /// Excitation probability per ultrafast pulse.
    pub p_exc: f64,
    /// Probability that a decay returns to |↓⟩ with a usable σ photon (β).
    pub branch_sigma: f64,
    /// Probability of π decay into the wrong ground state |X⟩.
    pub branch_pi: f64,
    /// Probability of decay into the D3/2 manifold.
    pub branch_d: f64,
    /// Fraction of π photons removed by the polarizer.
    pub pol_rejection: f64,
}

impl EmitterSpec {
    /// Barium-138 defaults: P_exc = 0.8, β = 0.49, τ_R = 7.85 ns.
    pub fn barium138() -> Self {
        Self {
            mass_kg: BA138_MASS_U * ATOMIC_MASS_UNIT,
            wavelength_m: BA_EMISSION_WAVELENGTH_M,
            tau_r_s: DEFAULT_TAU_R_S,
            p_exc: 0.8,
            branch_sigma: 0.49,
            branch_pi: 0.24,
            branch_d: 0.27,
            pol_rejection: 0.98,
        }
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        check_positive("mass_kg", self.mass_kg)?;
        check_positive("wavelength_m", self.wavelength_m)?;
        check_positive("tau_r_s", self.tau_r_s)?;
        check_unit("p_exc", self.p_exc)?;
        check_unit("pol_rejection", self.pol_rejection)?;
        check_unit("branch_sigma", self.branch_sigma)?;
        check_unit("branch_pi", self.branch_pi)?;
        check_unit("branch_d", self.branch_d)?;
        let total = self.branch_sigma + self.branch_pi + self.branch_d;
        if (total - 1.0).abs() > 1e-9 {
            return Err(PhysicsError::InvalidParameter {
                name: "branch_sigma + branch_pi + branch_d",
                value: total,
                reason: "branching ratios must sum to 1",
            });
        }
        Ok(())
    }

    /// Optical wavenumber k = 2π/λ.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength_m
    }

    /// Natural linewidth γ = 1/τ_R in rad/s.
    pub fn gamma(&self) -> f64 {
        1.0 / self.tau_r_s
    }
}

/// Beam geometry of one trap: α between emission and the x axis, β between
/// the excitation/cooling beam and the axial z axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamGeometry {
    pub alpha_deg: f64,
    pub beam_tilt_deg: f64,
}

impl BeamGeometry {
    pub fn new(alpha_deg: f64, beam_tilt_deg: f64) -> Result<Self, PhysicsError> {
        let g = Self {
            alpha_deg,
            beam_tilt_deg,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        for (name, v) in [("alpha_deg", self.alpha_deg), ("beam_tilt_deg", self.beam_tilt_deg)] {
            if !(0.0..180.0).contains(&v) {
                return Err(PhysicsError::InvalidParameter {
                    name,
                    value: v,
                    reason: "angle must lie in [0, 180) degrees",
                });
            }
        }
        Ok(())
    }
}

/// θ (excitation/cooling wavevector) and ψ (emission wavevector) angles to one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisPair {
    pub theta_deg: f64,
    pub psi_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisAngles {
    pub x: AxisPair,
    pub y: AxisPair,
    pub z: AxisPair,
}

impl AxisAngles {
    pub fn axis(&self, axis: ModeAxis) -> AxisPair {
        match axis {
            ModeAxis::X => self.x,
            ModeAxis::Y => self.y,
            ModeAxis::Z => self.z,
        }
    }
}

/// One motional normal mode of one ion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrapMode {
    pub node: NodeId,
    pub axis: ModeAxis,
    /// Secular frequency ω/2π.
    pub freq_hz: f64,
    /// Mean thermal occupation n̄.
    pub nbar: f64,
    /// Lamb-Dicke parameter for the excitation–emission wavevector difference.
    pub eta: f64,
    /// Lamb-Dicke parameter for the emission wavevector alone.
    pub zeta: f64,
}

impl TrapMode {
    /// Builds a mode with η and ζ derived from beam angles and emitter constants.
    pub fn from_geometry(
        node: NodeId,
        axis: ModeAxis,
        freq_hz: f64,
        nbar: f64,
        angles: &AxisAngles,
        emitter: &EmitterSpec,
    ) -> Result<Self, PhysicsError> {
        if nbar < 0.0 || !nbar.is_finite() {
            return Err(PhysicsError::InvalidParameter {
                name: "nbar",
                value: nbar,
                reason: "thermal occupation must be finite and non-negative",
            });
        }
        let r = recoil_params(freq_hz, angles.axis(axis), emitter)?;
        Ok(Self {
            node,
            axis,
            freq_hz,
            nbar,
            eta: r.eta,
            zeta: r.zeta,
        })
    }

    /// Angular frequency ω = 2π·f.
    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.freq_hz
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.node, self.axis)
    }
}

/// Mode references in the fixed product order (node A then B; axes z, x, y).
/// Modes that compare equal keep their input order.
pub fn canonical_order(modes: &[TrapMode]) -> Vec<&TrapMode> {
    let mut v: Vec<&TrapMode> = modes.iter().collect();
    v.sort_by_key(|m| (m.node, m.axis));
    v
}

/// Fiber coupling, optics transmission, detector efficiency and solid angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollectionChain {
    pub eps_fiber: f64,
    pub transmission: f64,
    pub eps_det: f64,
    pub solid_angle_frac: f64,
}

impl CollectionChain {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        check_unit("eps_fiber", self.eps_fiber)?;
        check_unit("transmission", self.transmission)?;
        check_unit("eps_det", self.eps_det)?;
        check_unit("solid_angle_frac", self.solid_angle_frac)
    }

    /// Probability that an emitted photon is detected: ε_F·T·ε_D·dΩ/4π.
    pub fn efficiency(&self) -> f64 {
        self.eps_fiber * self.transmission * self.eps_det * self.solid_angle_frac
    }

    pub fn lossless() -> Self {
        Self {
            eps_fiber: 1.0,
            transmission: 1.0,
            eps_det: 1.0,
            solid_angle_frac: 1.0,
        }
    }
}

/// Time-bin separation, post-selection half-window, attempt rate and duty cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolParams {
    pub tau_s: f64,
    pub delta_t_s: f64,
    pub rep_rate_hz: f64,
    pub duty: f64,
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        check_positive("tau_s", self.tau_s)?;
        if self.delta_t_s.is_nan() || self.delta_t_s < 0.0 {
            return Err(PhysicsError::InvalidParameter {
                name: "delta_t_s",
                value: self.delta_t_s,
                reason: "window must be non-negative",
            });
        }
        check_positive("rep_rate_hz", self.rep_rate_hz)?;
        check_unit("duty", self.duty)
    }

    pub fn with_delta_t(self, delta_t_s: f64) -> Self {
        Self { delta_t_s, ..self }
    }
}

/// One trap node: emitter, beam geometry, collection chain and its modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSpec {
    pub id: NodeId,
    pub emitter: EmitterSpec,
    pub geometry: BeamGeometry,
    pub chain: CollectionChain,
    pub modes: Vec<TrapMode>,
}

impl NodeSpec {
    pub fn angles(&self) -> AxisAngles {
        derive_beam_angles(&self.geometry)
    }

    /// Copy of this node with a different beam geometry; η and ζ are
    /// recomputed while frequencies and n̄ stay fixed.
    pub fn with_geometry(&self, geometry: BeamGeometry) -> Result<Self, PhysicsError> {
        let angles = derive_beam_angles(&geometry);
        let modes = self
            .modes
            .iter()
            .map(|m| TrapMode::from_geometry(m.node, m.axis, m.freq_hz, m.nbar, &angles, &self.emitter))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            geometry,
            modes,
            ..self.clone()
        })
    }

    /// Collection probability p_q of this node.
    pub fn collection_prob(&self) -> f64 {
        collection_prob(&self.emitter, &self.chain)
    }
}

/// Relative window w = δt/τ_R, scaled variance W and yield Y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowStats {
    pub w: f64,
    pub big_w: f64,
    pub yield_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceReport {
    /// C′, time-bin separation factor.
    pub c_timebin: f64,
    /// C″, random photon arrival factor.
    pub c_arrival: f64,
    pub c_total: f64,
    /// Zero-point phase η²·sin(ωτ) per mode, canonical order.
    pub phase_offsets: Vec<f64>,
}
