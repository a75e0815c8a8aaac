//! TOML run configuration.
//!
//! Keys carry their units (`freq_khz`, `tau_ns`, ...). Unknown keys are
//! rejected and every physical invariant is checked on load, so a
//! [`RunConfig`] that exists is valid.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{ATOMIC_MASS_UNIT, BA138_MASS_U};
use crate::monte_carlo::{NoiseParams, TomographyModel};
use crate::physics::{
    BeamGeometry, CollectionChain, DopplerSettings, EmitterSpec, ModeAxis, NodeId, NodeSpec, PhysicsError,
    ProtocolParams, TrapMode,
};
use crate::planner::{BellStateModel, ErrorBudgetEntry};

/// Configuration reproducing the published apparatus.
pub const REFERENCE_TOML: &str = include_str!("../configs/reference.toml");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config value {field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub workers: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seed: 1, workers: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub tau_ns: f64,
    pub delta_t_ns: f64,
    pub rep_rate_khz: f64,
    pub duty: f64,
    #[serde(default = "default_pulse_len_ps")]
    pub pulse_len_ps: f64,
}

fn default_pulse_len_ps() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub pulse_angle_rms: f64,
    pub dark_count_rate_hz: f64,
    pub detection_gate_ns: f64,
    pub wavepacket_overlap_error: f64,
    pub veto: bool,
    pub veto_miss_prob: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let n = NoiseParams::default();
        Self {
            pulse_angle_rms: n.pulse_angle_rms,
            dark_count_rate_hz: n.dark_count_rate_hz,
            detection_gate_ns: n.detection_gate_s * 1e9,
            wavepacket_overlap_error: n.wavepacket_overlap_error,
            veto: n.veto_enabled,
            veto_miss_prob: n.veto_miss_prob,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BellStateSection {
    pub p_odd: f64,
    pub base_contrast: f64,
    pub phase_offset_rad: f64,
}

impl Default for BellStateSection {
    fn default() -> Self {
        Self {
            p_odd: 1.0,
            base_contrast: 1.0,
            phase_offset_rad: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSection {
    /// ± beam-angle uncertainty for the window-sweep band.
    pub angle_uncertainty_deg: f64,
    pub tau_min_ns: f64,
    pub tau_max_ns: f64,
    pub tau_resolution_ns: f64,
}

impl Default for PlannerSection {
    fn default() -> Self {
        Self {
            angle_uncertainty_deg: 3.0,
            tau_min_ns: 5000.0,
            tau_max_ns: 7000.0,
            tau_resolution_ns: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmitterSection {
    pub mass_u: f64,
    pub wavelength_nm: f64,
    pub tau_r_ns: f64,
    pub p_exc: f64,
    pub branch_sigma: f64,
    pub branch_pi: f64,
    pub branch_d: f64,
    pub pol_rejection: f64,
}

impl Default for EmitterSection {
    fn default() -> Self {
        let e = EmitterSpec::barium138();
        Self {
            mass_u: BA138_MASS_U,
            wavelength_nm: e.wavelength_m * 1e9,
            tau_r_ns: e.tau_r_s * 1e9,
            p_exc: e.p_exc,
            branch_sigma: e.branch_sigma,
            branch_pi: e.branch_pi,
            branch_d: e.branch_d,
            pol_rejection: e.pol_rejection,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub alpha_deg: f64,
    pub beam_tilt_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub eps_fiber: f64,
    pub transmission: f64,
    pub eps_det: f64,
    pub solid_angle_frac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    pub axis: ModeAxis,
    pub freq_khz: f64,
    /// Mean occupation; the Doppler limit of the cooling geometry if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSection {
    #[serde(default)]
    pub emitter: EmitterSection,
    pub geometry: GeometrySection,
    pub chain: ChainSection,
    pub modes: Vec<ModeSection>,
}

/// The file as written, with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub run: RunSection,
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub doppler: DopplerSettings,
    #[serde(default)]
    pub bell_state: BellStateSection,
    #[serde(default)]
    pub planner: PlannerSection,
    pub node_a: NodeSection,
    pub node_b: NodeSection,
    #[serde(default)]
    pub budget: Vec<ErrorBudgetEntry>,
}

/// Validated configuration resolved into domain types.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub file: ConfigFile,
    pub nodes: [NodeSpec; 2],
    pub protocol: ProtocolParams,
    pub noise: NoiseParams,
    pub doppler: DopplerSettings,
    pub bell_state: BellStateModel,
    pub phase_offset_rad: f64,
    pub budget: Vec<ErrorBudgetEntry>,
    pub pulse_len_s: f64,
    pub seed: u64,
    pub workers: usize,
}

fn unit(field: &str, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(field, format!("{v} is outside [0, 1]")))
    }
}

fn resolve_node(id: NodeId, key: &str, s: &NodeSection, doppler: &DopplerSettings) -> Result<NodeSpec, ConfigError> {
    let phys = |sub: &str| {
        let field = format!("{key}.{sub}");
        move |e: PhysicsError| invalid(field, e)
    };
    let e = &s.emitter;
    let emitter = EmitterSpec {
        mass_kg: e.mass_u * ATOMIC_MASS_UNIT,
        wavelength_m: e.wavelength_nm * 1e-9,
        tau_r_s: e.tau_r_ns * 1e-9,
        p_exc: e.p_exc,
        branch_sigma: e.branch_sigma,
        branch_pi: e.branch_pi,
        branch_d: e.branch_d,
        pol_rejection: e.pol_rejection,
    };
    emitter.validate().map_err(phys("emitter"))?;
    let geometry = BeamGeometry::new(s.geometry.alpha_deg, s.geometry.beam_tilt_deg).map_err(phys("geometry"))?;
    let chain = CollectionChain {
        eps_fiber: s.chain.eps_fiber,
        transmission: s.chain.transmission,
        eps_det: s.chain.eps_det,
        solid_angle_frac: s.chain.solid_angle_frac,
    };
    chain.validate().map_err(phys("chain"))?;
    if s.modes.len() != 3 {
        return Err(invalid(format!("{key}.modes"), format!("expected 3 modes, found {}", s.modes.len())));
    }
    for axis in ModeAxis::ALL {
        if s.modes.iter().filter(|m| m.axis == axis).count() != 1 {
            return Err(invalid(format!("{key}.modes"), format!("axis {axis} must appear exactly once")));
        }
    }
    let mut node = NodeSpec {
        id,
        emitter,
        geometry,
        chain,
        modes: Vec::with_capacity(3),
    };
    let angles = node.angles();
    for m in &s.modes {
        let freq_hz = m.freq_khz * 1e3;
        let field = format!("{key}.modes.{}", m.axis);
        let nbar = match m.nbar {
            Some(n) => n,
            None => doppler
                .nbar(freq_hz, angles.axis(m.axis).theta_deg, emitter.gamma())
                .map_err(|e| invalid(field.clone(), e))?,
        };
        let mode = TrapMode::from_geometry(id, m.axis, freq_hz, nbar, &angles, &emitter).map_err(|e| invalid(field, e))?;
        node.modes.push(mode);
    }
    Ok(node)
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// The shipped configuration of the published apparatus.
    pub fn reference_defaults() -> Self {
        Self::from_toml_str(REFERENCE_TOML).expect("shipped config is valid")
    }

    pub fn from_file(file: ConfigFile) -> Result<Self, ConfigError> {
        let p = &file.protocol;
        let protocol = ProtocolParams {
            tau_s: p.tau_ns * 1e-9,
            delta_t_s: p.delta_t_ns * 1e-9,
            rep_rate_hz: p.rep_rate_khz * 1e3,
            duty: p.duty,
        };
        protocol.validate().map_err(|e| invalid("protocol", e))?;
        if !(p.pulse_len_ps >= 0.0) {
            return Err(invalid("protocol.pulse_len_ps", "must be non-negative"));
        }
        let d = &file.doppler;
        if !(d.detuning_over_gamma > 0.0) || !(d.saturation >= 0.0) {
            return Err(invalid("doppler", "detuning must be positive and saturation non-negative"));
        }
        let nodes = [
            resolve_node(NodeId::A, "node_a", &file.node_a, d)?,
            resolve_node(NodeId::B, "node_b", &file.node_b, d)?,
        ];
        if (nodes[0].emitter.tau_r_s - nodes[1].emitter.tau_r_s).abs() > 1e-15 {
            return Err(invalid("node_b.emitter.tau_r_ns", "both nodes must share one radiative lifetime"));
        }
        let n = &file.noise;
        unit("noise.veto_miss_prob", n.veto_miss_prob)?;
        if !(0.0..=0.5).contains(&n.wavepacket_overlap_error) {
            return Err(invalid("noise.wavepacket_overlap_error", "must lie in [0, 0.5]"));
        }
        for (field, v) in [
            ("noise.pulse_angle_rms", n.pulse_angle_rms),
            ("noise.dark_count_rate_hz", n.dark_count_rate_hz),
            ("noise.detection_gate_ns", n.detection_gate_ns),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(field, format!("{v} must be finite and non-negative")));
            }
        }
        let noise = NoiseParams {
            pulse_angle_rms: n.pulse_angle_rms,
            dark_count_rate_hz: n.dark_count_rate_hz,
            detection_gate_s: n.detection_gate_ns * 1e-9,
            wavepacket_overlap_error: n.wavepacket_overlap_error,
            veto_enabled: n.veto,
            veto_miss_prob: n.veto_miss_prob,
        };
        let b = &file.bell_state;
        unit("bell_state.p_odd", b.p_odd)?;
        unit("bell_state.base_contrast", b.base_contrast)?;
        let pl = &file.planner;
        if !(pl.tau_min_ns > 0.0 && pl.tau_max_ns >= pl.tau_min_ns && pl.tau_resolution_ns > 0.0) {
            return Err(invalid("planner", "need 0 < tau_min_ns <= tau_max_ns and tau_resolution_ns > 0"));
        }
        if !(pl.angle_uncertainty_deg >= 0.0) {
            return Err(invalid("planner.angle_uncertainty_deg", "must be non-negative"));
        }
        if file.run.workers == 0 {
            return Err(invalid("run.workers", "must be at least 1"));
        }
        for e in &file.budget {
            e.validate().map_err(|err| invalid("budget", err))?;
        }
        Ok(Self {
            nodes,
            protocol,
            noise,
            doppler: *d,
            bell_state: BellStateModel {
                p_odd: b.p_odd,
                base_contrast: b.base_contrast,
            },
            phase_offset_rad: b.phase_offset_rad,
            budget: file.budget.clone(),
            pulse_len_s: p.pulse_len_ps * 1e-12,
            seed: file.run.seed,
            workers: file.run.workers,
            file,
        })
    }

    /// Same configuration with another seed; the echo reflects it.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.file.run.seed = seed;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        let workers = workers.max(1);
        self.workers = workers;
        self.file.run.workers = workers;
        self
    }

    /// Resolved configuration as TOML, for logging next to results.
    pub fn echo(&self) -> String {
        toml::to_string(&self.file).expect("config serializes")
    }

    pub fn all_modes(&self) -> Vec<TrapMode> {
        self.nodes.iter().flat_map(|n| n.modes.iter().copied()).collect()
    }

    pub fn tau_r_s(&self) -> f64 {
        self.nodes[0].emitter.tau_r_s
    }

    pub fn tomography_model(&self) -> TomographyModel {
        TomographyModel {
            modes: self.all_modes(),
            tau_s: self.protocol.tau_s,
            p_odd: self.bell_state.p_odd,
            base_contrast: self.bell_state.base_contrast,
            overlap_error: self.noise.wavepacket_overlap_error,
            pulse_angle_rms: self.noise.pulse_angle_rms,
            phase_offset_rad: self.phase_offset_rad,
        }
    }
}
