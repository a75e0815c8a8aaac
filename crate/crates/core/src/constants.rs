//! Physical constants (CODATA 2018) and the canonical emitter defaults.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Radiative lifetime of the 493 nm emitting level used as the default, s.
pub const DEFAULT_TAU_R_S: f64 = 7.85e-9;

/// Mass number used for the barium-138 emitter.
pub const BA138_MASS_U: f64 = 138.0;

/// Emission wavelength of the P1/2 → S1/2 line, m.
pub const BA_EMISSION_WAVELENGTH_M: f64 = 493e-9;
