use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::physics::{canonical_order, TrapMode};

/// Draws a thermal coherent amplitude α ~ CN(0, n̄) (Glauber P distribution).
pub fn thermal_amplitude<R: Rng + ?Sized>(nbar: f64, rng: &mut R) -> Complex64 {
    let s = (0.5 * nbar).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Which recoil drives the motional coherence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KickKind {
    /// Excitation minus emission wavevector between the two time bins (η).
    TimeBin,
    /// Emission wavevector alone over the arrival-time difference (ζ).
    Emission,
}

/// One realization of the motional state of every mode and the coherence it
/// leaves on the spin–photon state.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionalSample {
    /// Thermal amplitudes in canonical mode order.
    pub alphas: Vec<Complex64>,
    /// |⟨α|D(−iλ)D(iλe^(−iωt))|α⟩| multiplied over modes.
    pub magnitude: f64,
    /// Total phase: zero-point part λ²·sin ωt plus the thermal part.
    pub phase: f64,
}

impl MotionalSample {
    /// Samples thermal amplitudes and evaluates the coherent-state overlap
    /// after two kicks separated by `interval_s`.
    pub fn draw<R: Rng + ?Sized>(modes: &[TrapMode], kick: KickKind, interval_s: f64, rng: &mut R) -> Self {
        let mut alphas = Vec::with_capacity(modes.len());
        let mut log_mag = 0.0;
        let mut phase = 0.0;
        for m in canonical_order(modes) {
            let lambda = match kick {
                KickKind::TimeBin => m.eta,
                KickKind::Emission => m.zeta,
            };
            let alpha = thermal_amplitude(m.nbar, rng);
            let wt = m.omega() * interval_s;
            let beta = Complex64::new(0.0, lambda) * (Complex64::from_polar(1.0, -wt) - 1.0);
            log_mag -= 0.5 * beta.norm_sqr();
            phase += lambda * lambda * wt.sin() - 2.0 * (beta * alpha.conj()).im;
            alphas.push(alpha);
        }
        Self {
            alphas,
            magnitude: log_mag.exp(),
            phase,
        }
    }

    pub fn coherence(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }
}

/// Monte Carlo estimate of the single-mode arrival-time factor: the mean over
/// accepted arrival differences x of exp[−ζ²(2n̄+1)(1 − cos ωx)].
pub fn motional_coherence_sampled<R: Rng + ?Sized>(
    zeta: f64,
    freq_hz: f64,
    nbar: f64,
    tau_r_s: f64,
    delta_t_s: f64,
    n_samples: usize,
    rng: &mut R,
) -> f64 {
    let dist = super::TruncatedLaplace::new(tau_r_s, delta_t_s);
    let omega = 2.0 * std::f64::consts::PI * freq_hz;
    let k = zeta * zeta * (2.0 * nbar + 1.0);
    let sum: f64 = (0..n_samples)
        .map(|_| (-k * (1.0 - (omega * dist.sample(rng)).cos())).exp())
        .sum();
    sum / n_samples as f64
}

/// Monte Carlo estimate of the all-mode arrival-time factor, one shared
/// arrival difference per sample.
pub fn arrival_coherence_sampled<R: Rng + ?Sized>(
    modes: &[TrapMode],
    tau_r_s: f64,
    delta_t_s: f64,
    n_samples: usize,
    rng: &mut R,
) -> f64 {
    let dist = super::TruncatedLaplace::new(tau_r_s, delta_t_s);
    let ordered = canonical_order(modes);
    let sum: f64 = (0..n_samples)
        .map(|_| {
            let x = dist.sample(rng);
            let e: f64 = ordered
                .iter()
                .map(|m| m.zeta * m.zeta * (2.0 * m.nbar + 1.0) * (1.0 - (m.omega() * x).cos()))
                .sum();
            (-e).exp()
        })
        .sum();
    sum / n_samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{contrast_timebin, ModeAxis, NodeId};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mode(freq_hz: f64, eta: f64, zeta: f64, nbar: f64) -> TrapMode {
        TrapMode {
            node: NodeId::A,
            axis: ModeAxis::X,
            freq_hz,
            nbar,
            eta,
            zeta,
        }
    }

    #[test]
    fn thermal_amplitude_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let m: f64 = (0..n).map(|_| thermal_amplitude(20.0, &mut rng).norm_sqr()).sum::<f64>() / n as f64;
        assert!((m / 20.0 - 1.0).abs() < 0.02, "{m}");
    }

    #[test]
    fn thermal_average_recovers_closed_form() {
        let modes = [mode(1e6, 0.1, 0.0, 10.0)];
        let tau = 0.3e-6;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut acc = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            acc += MotionalSample::draw(&modes, KickKind::TimeBin, tau, &mut rng).coherence();
        }
        acc /= n as f64;
        let (c, ph) = contrast_timebin(&modes, tau);
        assert!((acc.norm() - c).abs() < 0.01, "{} {c}", acc.norm());
        assert!((acc.arg() - ph[0]).abs() < 0.02);
    }

    #[test]
    fn zero_window_sample_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = motional_coherence_sampled(0.07, 1e6, 800.0, 7.85e-9, 0.0, 100, &mut rng);
        assert_eq!(c, 1.0);
    }
}
