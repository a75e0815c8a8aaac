//! Desk-scale model of heralded remote entanglement between two trapped-ion
//! memories linked by time-bin photons.
//!
//! The crate is split along the data flow of an experiment:
//!
//! - [`physics`]: closed-form recoil, cooling, window, contrast and rate formulas.
//! - [`monte_carlo`]: stochastic attempt engine, numerical oracles and synthetic tomography.
//! - [`event_stream`]: time-tag record formats, attempt framing and herald classification.
//! - [`analysis`]: parity-fringe, population, Ramsey and threshold estimators.
//! - [`planner`]: τ tuning, figure sweeps, error budgets and fidelity prediction.
//! - [`config`]: the TOML run configuration that binds everything together.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod constants;
pub mod event_stream;
pub mod monte_carlo;
pub mod physics;
pub mod planner;

pub use config::{ConfigError, RunConfig};
pub use physics::{
    AxisAngles, AxisPair, BeamGeometry, CollectionChain, CoherenceReport, EmitterSpec, ModeAxis,
    NodeId, NodeSpec, PhysicsError, ProtocolParams, TrapMode, WindowStats,
};
