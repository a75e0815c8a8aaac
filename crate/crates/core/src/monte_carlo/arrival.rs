use rand::Rng;

/// Laplace(0, τ_R) restricted to |d| ≤ δt: the distribution of the
/// difference of two independent exponential photon arrival delays
/// conditioned on passing the coincidence window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedLaplace {
    pub tau_r_s: f64,
    pub delta_t_s: f64,
}

impl TruncatedLaplace {
    pub fn new(tau_r_s: f64, delta_t_s: f64) -> Self {
        debug_assert!(tau_r_s > 0.0 && delta_t_s >= 0.0);
        Self { tau_r_s, delta_t_s }
    }

    fn mass(&self) -> f64 {
        -(-self.delta_t_s / self.tau_r_s).exp_m1()
    }

    pub fn cdf(&self, d: f64) -> f64 {
        if d <= -self.delta_t_s {
            return 0.0;
        }
        if d >= self.delta_t_s {
            return 1.0;
        }
        // Half the mass of |d| ≤ |x| on each side.
        let half = |x: f64| 0.5 * -(-x.abs() / self.tau_r_s).exp_m1() / self.mass();
        if d >= 0.0 {
            0.5 + half(d)
        } else {
            0.5 - half(d)
        }
    }

    /// ⟨d²⟩ = 2·W·τ_R².
    pub fn variance(&self) -> f64 {
        let ws = crate::physics::window_stats(self.delta_t_s, self.tau_r_s);
        2.0 * ws.big_w * self.tau_r_s * self.tau_r_s
    }

    /// Inverse-CDF draw of |d| with a random sign.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.delta_t_s == 0.0 {
            return 0.0;
        }
        let u: f64 = rng.random();
        let mag = -self.tau_r_s * (-u * self.mass()).ln_1p();
        let mag = mag.min(self.delta_t_s);
        if rng.random_bool(0.5) {
            mag
        } else {
            -mag
        }
    }
}

/// Draws one accepted arrival-time difference.
pub fn sample_arrival_diff<R: Rng + ?Sized>(tau_r_s: f64, delta_t_s: f64, rng: &mut R) -> f64 {
    TruncatedLaplace::new(tau_r_s, delta_t_s).sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_stay_in_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = TruncatedLaplace::new(7.85e-9, 10e-9);
        for _ in 0..10_000 {
            let x = d.sample(&mut rng);
            assert!(x.abs() <= 10e-9);
        }
        assert_eq!(sample_arrival_diff(7.85e-9, 0.0, &mut rng), 0.0);
    }

    #[test]
    fn cdf_is_symmetric() {
        let d = TruncatedLaplace::new(7.85e-9, 10e-9);
        assert_eq!(d.cdf(0.0), 0.5);
        for x in [1e-9, 4e-9, 9e-9] {
            assert!((d.cdf(x) + d.cdf(-x) - 1.0).abs() < 1e-14);
        }
        assert_eq!(d.cdf(11e-9), 1.0);
        assert_eq!(d.cdf(-11e-9), 0.0);
    }

    #[test]
    fn sample_moments_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = TruncatedLaplace::new(7.85e-9, 20e-9);
        let n = 200_000;
        let m2: f64 = (0..n).map(|_| d.sample(&mut rng).powi(2)).sum::<f64>() / n as f64;
        assert!((m2 / d.variance() - 1.0).abs() < 0.01, "{m2} {}", d.variance());
    }
}
