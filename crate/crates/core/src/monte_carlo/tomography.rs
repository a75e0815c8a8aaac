use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::herald::BellState;
use super::motion::{KickKind, MotionalSample};
use super::TruncatedLaplace;
use crate::analysis::{ParityPoint, PopulationCounts};
use crate::physics::{coherence_report, TrapMode};

/// Everything that shapes the measured two-ion state after a herald.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TomographyModel {
    pub modes: Vec<TrapMode>,
    pub tau_s: f64,
    /// Probability of finding anti-aligned spins.
    pub p_odd: f64,
    /// Contrast left after every effect not modeled here.
    pub base_contrast: f64,
    /// Fidelity error from wavepacket mismatch; contrast factor 1 − 2·error.
    pub overlap_error: f64,
    /// Relative rms error of every rotation angle.
    pub pulse_angle_rms: f64,
    /// Fixed phase of the Ψ⁺ parity fringe.
    pub phase_offset_rad: f64,
}

impl TomographyModel {
    fn rms(&self, angle: f64) -> f64 {
        self.pulse_angle_rms * angle
    }

    /// Mean probability that exactly one of the two swap π pulses fails.
    fn mean_swap_flip(&self) -> f64 {
        let s = self.rms(std::f64::consts::PI);
        let f = 0.5 * (1.0 - (-0.5 * s * s).exp());
        2.0 * f * (1.0 - f)
    }

    /// Expected parity contrast of accepted heralds for a window δt.
    pub fn predicted_contrast(&self, tau_r_s: f64, delta_t_s: f64) -> f64 {
        let report = coherence_report(&self.modes, self.tau_s, delta_t_s, tau_r_s);
        let s = self.rms(std::f64::consts::FRAC_PI_2);
        let analysis = (-0.5 * s * s).exp();
        self.base_contrast
            * (1.0 - 2.0 * self.overlap_error)
            * (1.0 - self.mean_swap_flip())
            * analysis
            * analysis
            * report.c_total
    }

    /// Expected odd-parity population including swap pulse failures.
    pub fn predicted_p_odd(&self) -> f64 {
        let q = self.mean_swap_flip();
        self.p_odd * (1.0 - q) + (1.0 - self.p_odd) * q
    }
}

/// One heralded attempt handed to the tomography stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeraldEvent {
    pub state: BellState,
    /// Late-minus-early photon arrival difference.
    pub deviation_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateData {
    pub parity: Vec<ParityPoint>,
    pub population: PopulationCounts,
}

impl StateData {
    fn new(phases: &[f64]) -> Self {
        Self {
            parity: phases
                .iter()
                .map(|&phase_rad| ParityPoint {
                    phase_rad,
                    n_shots: 0,
                    n_odd: 0,
                })
                .collect(),
            population: PopulationCounts::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TomographyData {
    pub psi_plus: StateData,
    pub psi_minus: StateData,
}

impl TomographyData {
    pub fn state(&self, s: BellState) -> &StateData {
        match s {
            BellState::PsiPlus => &self.psi_plus,
            BellState::PsiMinus => &self.psi_minus,
        }
    }
}

/// Turns heralds into parity-scan and population counts.
///
/// Each state cycles through the analysis phases and then one population
/// setting, one single-shot measurement per herald. Per herald the motional
/// coherence is sampled for the time-bin separation and for that herald's
/// arrival difference, and rotation angles get Gaussian errors.
pub fn tomography_from_heralds<R: Rng + ?Sized>(
    model: &TomographyModel,
    heralds: &[HeraldEvent],
    phases: &[f64],
    rng: &mut R,
) -> TomographyData {
    let mut data = TomographyData {
        psi_plus: StateData::new(phases),
        psi_minus: StateData::new(phases),
    };
    let settings = phases.len() + 1;
    let mut next = [0usize; 2];
    let swap = Normal::new(0.0, model.rms(std::f64::consts::PI)).expect("finite rms");
    let analysis = Normal::new(0.0, model.rms(std::f64::consts::FRAC_PI_2)).expect("finite rms");
    let scale = model.base_contrast * (1.0 - 2.0 * model.overlap_error);
    for h in heralds {
        let slot = match h.state {
            BellState::PsiPlus => 0,
            BellState::PsiMinus => 1,
        };
        let setting = next[slot] % settings;
        next[slot] += 1;
        let flip = |e: f64| (0.5 * e).sin().powi(2);
        let (fa, fb) = (flip(swap.sample(rng)), flip(swap.sample(rng)));
        let p_flip = fa * (1.0 - fb) + fb * (1.0 - fa);
        let state = match h.state {
            BellState::PsiPlus => &mut data.psi_plus,
            BellState::PsiMinus => &mut data.psi_minus,
        };
        if setting == phases.len() {
            let p = model.p_odd * (1.0 - p_flip) + (1.0 - model.p_odd) * p_flip;
            state.population.n_shots += 1;
            state.population.n_odd += u64::from(rng.random_bool(p.clamp(0.0, 1.0)));
            continue;
        }
        let c = MotionalSample::draw(&model.modes, KickKind::TimeBin, model.tau_s, rng).coherence()
            * MotionalSample::draw(&model.modes, KickKind::Emission, h.deviation_s, rng).coherence();
        let amp = scale * (1.0 - p_flip) * analysis.sample(rng).cos() * analysis.sample(rng).cos() * c.norm();
        let phi0 = model.phase_offset_rad + c.arg();
        let parity = h.state.parity_sign() * amp * (phases[setting] - phi0).cos();
        let point = &mut state.parity[setting];
        point.n_shots += 1;
        point.n_odd += u64::from(rng.random_bool((0.5 * (1.0 - parity)).clamp(0.0, 1.0)));
    }
    data
}

/// Draws `n_heralds` heralds (Ψ⁺/Ψ⁻ equally likely, arrival differences from
/// the truncated Laplace law) and measures them.
pub fn synthesize_tomography<R: Rng + ?Sized>(
    model: &TomographyModel,
    n_heralds: usize,
    phases: &[f64],
    tau_r_s: f64,
    delta_t_s: f64,
    rng: &mut R,
) -> TomographyData {
    let dist = TruncatedLaplace::new(tau_r_s, delta_t_s);
    let heralds: Vec<HeraldEvent> = (0..n_heralds)
        .map(|_| HeraldEvent {
            state: if rng.random_bool(0.5) {
                BellState::PsiPlus
            } else {
                BellState::PsiMinus
            },
            deviation_s: dist.sample(rng),
        })
        .collect();
    tomography_from_heralds(model, &heralds, phases, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> TomographyModel {
        TomographyModel {
            modes: vec![],
            tau_s: 6e-6,
            p_odd: 1.0,
            base_contrast: 1.0,
            overlap_error: 0.0,
            pulse_angle_rms: 0.0,
            phase_offset_rad: 0.0,
        }
    }

    #[test]
    fn ideal_state_has_full_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let phases = [0.0, std::f64::consts::PI];
        let d = synthesize_tomography(&model(), 3000, &phases, 7.85e-9, 10e-9, &mut rng);
        let p = &d.psi_plus.parity;
        assert_eq!(p[0].n_odd, 0);
        assert_eq!(p[1].n_odd, p[1].n_shots);
        let m = &d.psi_minus.parity;
        assert_eq!(m[0].n_odd, m[0].n_shots);
        assert_eq!(d.psi_plus.population.n_odd, d.psi_plus.population.n_shots);
        let total: u64 = [&d.psi_plus, &d.psi_minus]
            .iter()
            .map(|s| s.population.n_shots + s.parity.iter().map(|p| p.n_shots).sum::<u64>())
            .sum();
        assert_eq!(total, 3000);
    }

    #[test]
    fn prediction_includes_pulse_errors() {
        let m = TomographyModel {
            pulse_angle_rms: 0.01,
            overlap_error: 0.01,
            ..model()
        };
        let c = m.predicted_contrast(7.85e-9, 10e-9);
        assert!(c < 0.98 && c > 0.97, "{c}");
        assert!(m.predicted_p_odd() < 1.0);
    }
}
