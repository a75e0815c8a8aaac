use serde::{Deserialize, Serialize};

use super::{AxisAngles, AxisPair, BeamGeometry, EmitterSpec, PhysicsError};
use crate::constants::HBAR;

fn acos_deg(c: f64) -> f64 {
    c.clamp(-1.0, 1.0).acos().to_degrees()
}

/// Angles between each principal axis and the excitation/cooling (θ) and
/// emission (ψ) wavevectors. The emission direction is perpendicular to z,
/// so ψ_z is always 90°.
pub fn derive_beam_angles(geom: &BeamGeometry) -> AxisAngles {
    let (sa, ca) = geom.alpha_deg.to_radians().sin_cos();
    let (sb, cb) = geom.beam_tilt_deg.to_radians().sin_cos();
    AxisAngles {
        x: AxisPair {
            theta_deg: acos_deg(-sb * sa),
            psi_deg: acos_deg(ca),
        },
        y: AxisPair {
            theta_deg: acos_deg(sb * ca),
            psi_deg: acos_deg(sa),
        },
        z: AxisPair {
            theta_deg: acos_deg(-cb),
            psi_deg: 90.0,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecoilParams {
    pub eta: f64,
    pub zeta: f64,
}

/// Lamb-Dicke parameters of one mode:
/// η = √(ħk²/2mω)·|cos ψ − cos θ| and ζ = √(ħk²/2mω)·|cos ψ|.
pub fn recoil_params(
    freq_hz: f64,
    angles: AxisPair,
    emitter: &EmitterSpec,
) -> Result<RecoilParams, PhysicsError> {
    if !(freq_hz > 0.0) || !freq_hz.is_finite() {
        return Err(PhysicsError::NonPositiveFrequency(freq_hz));
    }
    let omega = 2.0 * std::f64::consts::PI * freq_hz;
    let k = emitter.wavenumber();
    let scale = (HBAR * k * k / (2.0 * emitter.mass_kg * omega)).sqrt();
    // cos(90°) in floating point is ~6e-17, not zero; snap it so ζ_z is exactly 0.
    let cos_snap = |deg: f64| {
        let c = deg.to_radians().cos();
        if c.abs() < 1e-15 {
            0.0
        } else {
            c
        }
    };
    let cos_psi = cos_snap(angles.psi_deg);
    let cos_theta = cos_snap(angles.theta_deg);
    Ok(RecoilParams {
        eta: scale * (cos_psi - cos_theta).abs(),
        zeta: scale * cos_psi.abs(),
    })
}

/// Detuning and saturation of the Doppler cooling beam.
///
/// Defaults Δ = γ/2 and s = 1 reproduce the tabulated Doppler limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DopplerSettings {
    pub detuning_over_gamma: f64,
    pub saturation: f64,
}

impl Default for DopplerSettings {
    fn default() -> Self {
        Self {
            detuning_over_gamma: 0.5,
            saturation: 1.0,
        }
    }
}

impl DopplerSettings {
    /// n̄ for a mode at `freq_hz` cooled by a beam at `theta_deg`.
    pub fn nbar(&self, freq_hz: f64, theta_deg: f64, gamma: f64) -> Result<f64, PhysicsError> {
        doppler_nbar(
            freq_hz,
            theta_deg,
            gamma,
            self.detuning_over_gamma * gamma,
            self.saturation,
        )
    }

    /// The bracket [Δ/γ + γ(1+s)/4Δ] times γ/4ω, i.e. n̄ without the
    /// angular projection factor.
    pub fn isotropic_part(&self, freq_hz: f64, gamma: f64) -> Result<f64, PhysicsError> {
        if !(freq_hz > 0.0) {
            return Err(PhysicsError::NonPositiveFrequency(freq_hz));
        }
        let omega = 2.0 * std::f64::consts::PI * freq_hz;
        let delta = self.detuning_over_gamma * gamma;
        Ok(gamma / (4.0 * omega)
            * (delta / gamma + gamma * (1.0 + self.saturation) / (4.0 * delta)))
    }
}

/// Doppler cooling limit
/// n̄ = (γ/4ω)[Δ/γ + γ(1+s)/4Δ](1 + 1/(3cos²θ)).
pub fn doppler_nbar(
    freq_hz: f64,
    theta_deg: f64,
    gamma_rad_s: f64,
    detuning_rad_s: f64,
    sat_s: f64,
) -> Result<f64, PhysicsError> {
    if !(freq_hz > 0.0) {
        return Err(PhysicsError::NonPositiveFrequency(freq_hz));
    }
    super::check_positive("gamma_rad_s", gamma_rad_s)?;
    super::check_positive("detuning_rad_s", detuning_rad_s)?;
    super::check_positive("sat_s", sat_s)?;
    let c = theta_deg.to_radians().cos();
    if c.abs() < 1e-12 {
        return Err(PhysicsError::UncooledAxis { theta_deg });
    }
    let omega = 2.0 * std::f64::consts::PI * freq_hz;
    let bracket = detuning_rad_s / gamma_rad_s + gamma_rad_s * (1.0 + sat_s) / (4.0 * detuning_rad_s);
    Ok(gamma_rad_s / (4.0 * omega) * bracket * (1.0 + 1.0 / (3.0 * c * c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::ModeAxis;
    use approx::assert_abs_diff_eq;

    #[test]
    fn angles_alice() {
        let a = derive_beam_angles(&BeamGeometry::new(45.0, 45.0).unwrap());
        assert_abs_diff_eq!(a.x.theta_deg, 120.0, epsilon = 1e-9);
        assert_abs_diff_eq!(a.x.psi_deg, 45.0, epsilon = 1e-9);
        assert_abs_diff_eq!(a.y.theta_deg, 60.0, epsilon = 1e-9);
        assert_abs_diff_eq!(a.z.theta_deg, 135.0, epsilon = 1e-9);
        assert_eq!(a.z.psi_deg, 90.0);
    }

    #[test]
    fn angles_bob() {
        let a = derive_beam_angles(&BeamGeometry::new(85.5, 45.0).unwrap());
        assert_abs_diff_eq!(a.y.theta_deg, 86.8, epsilon = 0.1);
        assert_abs_diff_eq!(a.y.psi_deg, 4.5, epsilon = 0.1);
        assert_abs_diff_eq!(a.x.theta_deg, 134.8, epsilon = 0.1);
        assert_abs_diff_eq!(a.x.psi_deg, 85.5, epsilon = 0.1);
    }

    #[test]
    fn angles_axis_aligned() {
        let a = derive_beam_angles(&BeamGeometry::new(0.0, 0.0).unwrap());
        assert_abs_diff_eq!(a.z.theta_deg, 180.0, epsilon = 1e-9);
        assert_abs_diff_eq!(a.x.psi_deg, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(a.x.theta_deg, 90.0, epsilon = 1e-9);
    }

    #[test]
    fn geometry_rejects_out_of_range() {
        assert!(BeamGeometry::new(180.0, 0.0).is_err());
        assert!(BeamGeometry::new(10.0, -1.0).is_err());
    }

    #[test]
    fn recoil_alice_modes() {
        let e = EmitterSpec::barium138();
        let a = derive_beam_angles(&BeamGeometry::new(45.0, 45.0).unwrap());
        let z = recoil_params(991.5e3, a.axis(ModeAxis::Z), &e).unwrap();
        assert_abs_diff_eq!(z.eta, 0.0548, epsilon = 5e-4);
        assert_eq!(z.zeta, 0.0);
        let x = recoil_params(1157.5e3, a.axis(ModeAxis::X), &e).unwrap();
        assert_abs_diff_eq!(x.eta, 0.086, epsilon = 1e-3);
        assert_abs_diff_eq!(x.zeta, 0.051, epsilon = 1e-3);
    }

    #[test]
    fn recoil_vanishes_for_equal_angles() {
        let e = EmitterSpec::barium138();
        let pair = AxisPair {
            theta_deg: 33.0,
            psi_deg: 33.0,
        };
        for f in [1e3, 1e6, 7.3e6] {
            assert_eq!(recoil_params(f, pair, &e).unwrap().eta, 0.0);
        }
    }

    #[test]
    fn recoil_rejects_nonpositive_frequency() {
        let e = EmitterSpec::barium138();
        let pair = AxisPair {
            theta_deg: 10.0,
            psi_deg: 20.0,
        };
        assert_eq!(
            recoil_params(0.0, pair, &e),
            Err(PhysicsError::NonPositiveFrequency(0.0))
        );
        assert!(recoil_params(-5.0, pair, &e).is_err());
    }

    #[test]
    fn recoil_scales_as_inverse_sqrt_frequency() {
        let e = EmitterSpec::barium138();
        let pair = AxisPair {
            theta_deg: 120.0,
            psi_deg: 45.0,
        };
        let r1 = recoil_params(0.5e6, pair, &e).unwrap();
        let r4 = recoil_params(2.0e6, pair, &e).unwrap();
        assert_abs_diff_eq!(r4.eta, r1.eta / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r4.zeta, r1.zeta / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn doppler_table_values() {
        let gamma = 1.0 / 7.85e-9;
        let s = DopplerSettings::default();
        let az = s.nbar(991.5e3, 135.0, gamma).unwrap();
        assert!((az - 13.0).abs() <= 1.0, "{az}");
        let by = s.nbar(992.0e3, 86.8, gamma).unwrap();
        assert!((by - 826.0).abs() <= 10.0, "{by}");
    }

    #[test]
    fn doppler_isotropic_projection() {
        let gamma = 1.0 / 7.85e-9;
        let theta = (1.0f64 / 3.0).sqrt().acos().to_degrees();
        let f = 1.0e6;
        let n = doppler_nbar(f, theta, gamma, gamma / 2.0, 1.0).unwrap();
        let omega = 2.0 * std::f64::consts::PI * f;
        assert_abs_diff_eq!(n, gamma / (4.0 * omega) * 3.0, epsilon = 1e-12);
    }

    #[test]
    fn doppler_uncooled_axis() {
        let err = doppler_nbar(1e6, 90.0, 1e8, 5e7, 1.0).unwrap_err();
        assert!(matches!(err, PhysicsError::UncooledAxis { .. }));
    }
}
