use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Ramsey fringe amplitude after a free-evolution delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamseyPoint {
    pub delay_s: f64,
    pub amplitude: f64,
    /// One-sigma uncertainty of the amplitude.
    pub err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RamseyOptions {
    /// Constrain A ≤ 0.5, the largest amplitude of a single-ion fringe.
    pub cap_amplitude: bool,
}

/// Fit of a(t) = A·exp[−(t/T₂*)²] with absolute uncertainties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RamseyFit {
    pub amplitude: f64,
    pub amplitude_se: f64,
    pub t2_star_s: f64,
    pub t2_star_se: f64,
    pub chi2: f64,
    pub dof: usize,
    /// A was held at the 0.5 bound.
    pub amplitude_at_bound: bool,
}

struct Problem<'a> {
    u: Vec<f64>,
    pts: &'a [RamseyPoint],
}

impl Problem<'_> {
    fn model(&self, i: usize, a: f64, t: f64) -> (f64, f64, f64) {
        let x = self.u[i] / t;
        let e = (-x * x).exp();
        // Value, ∂/∂A, ∂/∂T.
        (a * e, e, a * e * 2.0 * x * x / t)
    }

    fn chi2(&self, a: f64, t: f64) -> f64 {
        (0..self.u.len())
            .map(|i| {
                let r = (self.pts[i].amplitude - self.model(i, a, t).0) / self.pts[i].err;
                r * r
            })
            .sum()
    }

    /// Weighted Jacobian over the free parameters and weighted residuals.
    fn linearize(&self, a: f64, t: f64, fix_a: bool) -> (DMatrix<f64>, DVector<f64>) {
        let k = if fix_a { 1 } else { 2 };
        let n = self.u.len();
        let mut j = DMatrix::zeros(n, k);
        let mut r = DVector::zeros(n);
        for i in 0..n {
            let (m, da, dt) = self.model(i, a, t);
            let s = self.pts[i].err;
            r[i] = (self.pts[i].amplitude - m) / s;
            if fix_a {
                j[(i, 0)] = dt / s;
            } else {
                j[(i, 0)] = da / s;
                j[(i, 1)] = dt / s;
            }
        }
        (j, r)
    }

    /// Levenberg–Marquardt on (A, T) or on T alone.
    fn solve(&self, mut a: f64, mut t: f64, fix_a: bool) -> Result<(f64, f64, f64), AnalysisError> {
        let mut chi = self.chi2(a, t);
        let mut lambda = 1e-3;
        for _ in 0..500 {
            let (j, r) = self.linearize(a, t, fix_a);
            let jtj = j.transpose() * &j;
            let g = j.transpose() * &r;
            if g.amax() < 1e-12 * (1.0 + chi) {
                return Ok((a, t, chi));
            }
            let mut improved = false;
            while lambda < 1e12 {
                let mut m = jtj.clone();
                for d in 0..m.nrows() {
                    m[(d, d)] *= 1.0 + lambda;
                }
                let Some(step) = m.lu().solve(&g) else {
                    lambda *= 10.0;
                    continue;
                };
                let (na, nt) = if fix_a { (a, t + step[0]) } else { (a + step[0], t + step[1]) };
                if nt > 0.0 {
                    let nchi = self.chi2(na, nt);
                    if nchi <= chi {
                        let converged = (chi - nchi) <= 1e-15 * chi.max(1e-300);
                        a = na;
                        t = nt;
                        chi = nchi;
                        lambda = (lambda * 0.1).max(1e-12);
                        improved = true;
                        if converged {
                            return Ok((a, t, chi));
                        }
                        break;
                    }
                }
                lambda *= 10.0;
            }
            if !improved {
                return Ok((a, t, chi));
            }
        }
        Err(AnalysisError::NoConvergence("Ramsey fit exceeded 500 iterations".into()))
    }
}

/// Fits a Gaussian Ramsey decay by weighted nonlinear least squares.
///
/// The start point comes from a weighted linear fit of ln a against t².
/// Errors are treated as absolute; standard errors are from the inverse
/// curvature matrix at the optimum.
pub fn fit_ramsey(points: &[RamseyPoint], opts: &RamseyOptions) -> Result<RamseyFit, AnalysisError> {
    if points.len() < 3 {
        return Err(AnalysisError::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    if let Some(p) = points
        .iter()
        .find(|p| !(p.err > 0.0) || !p.delay_s.is_finite() || p.delay_s < 0.0 || !p.amplitude.is_finite())
    {
        return Err(AnalysisError::InvalidData(format!(
            "point at delay {} s has error {} and amplitude {}",
            p.delay_s, p.err, p.amplitude
        )));
    }
    let scale = points.iter().map(|p| p.delay_s).fold(0.0, f64::max);
    if scale <= 0.0 {
        return Err(AnalysisError::InvalidData("all delays are zero".into()));
    }
    let prob = Problem {
        u: points.iter().map(|p| p.delay_s / scale).collect(),
        pts: points,
    };

    // Weighted regression of ln a on u².
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, p) in points.iter().enumerate().filter(|(_, p)| p.amplitude > 0.0) {
        let w = (p.amplitude / p.err).powi(2);
        let x = prob.u[i] * prob.u[i];
        let y = p.amplitude.ln();
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    if sw == 0.0 {
        return Err(AnalysisError::InvalidData("no positive amplitudes".into()));
    }
    let det = sw * sxx - sx * sx;
    let slope = if det > 0.0 { (sw * sxy - sx * sy) / det } else { 0.0 };
    let (a0, t0) = if slope < 0.0 {
        (((sy - slope * sx) / sw).exp(), (-1.0 / slope).sqrt())
    } else {
        (points.iter().map(|p| p.amplitude).fold(f64::MIN, f64::max), 1.0)
    };

    let (mut a, mut t, mut chi) = prob.solve(a0, t0, false)?;
    let mut at_bound = false;
    if opts.cap_amplitude && a > 0.5 {
        let (_, t1, c1) = prob.solve(0.5, t, true)?;
        a = 0.5;
        t = t1;
        chi = c1;
        at_bound = true;
    }
    let (j, _) = prob.linearize(a, t, at_bound);
    let cov = (j.transpose() * &j)
        .try_inverse()
        .ok_or_else(|| AnalysisError::InvalidData("singular curvature matrix".into()))?;
    let (amplitude_se, t_var) = if at_bound { (0.0, cov[(0, 0)]) } else { (cov[(0, 0)].sqrt(), cov[(1, 1)]) };
    Ok(RamseyFit {
        amplitude: a,
        amplitude_se,
        t2_star_s: t * scale,
        t2_star_se: t_var.sqrt() * scale,
        chi2: chi,
        dof: points.len() - if at_bound { 1 } else { 2 },
        amplitude_at_bound: at_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(a: f64, t2: f64, err: f64) -> Vec<RamseyPoint> {
        (0..12)
            .map(|i| {
                let delay_s = i as f64 * 0.3e-3;
                RamseyPoint {
                    delay_s,
                    amplitude: a * (-(delay_s / t2).powi(2)).exp(),
                    err,
                }
            })
            .collect()
    }

    #[test]
    fn recovers_noiseless_decay() {
        let f = fit_ramsey(&exact(0.48, 2.1e-3, 0.02), &RamseyOptions::default()).unwrap();
        assert!((f.t2_star_s - 2.1e-3).abs() < 1e-9);
        assert!((f.amplitude - 0.48).abs() < 1e-9);
        assert!(f.chi2 < 1e-12);
        assert!(f.t2_star_se > 0.0);
    }

    #[test]
    fn amplitude_cap() {
        let f = fit_ramsey(&exact(0.6, 1e-3, 0.02), &RamseyOptions { cap_amplitude: true }).unwrap();
        assert!(f.amplitude_at_bound);
        assert_eq!(f.amplitude, 0.5);
        assert_eq!(f.dof, 11);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_ramsey(&exact(0.5, 1e-3, 0.02)[..2], &RamseyOptions::default()).is_err());
        assert!(fit_ramsey(&exact(0.5, 1e-3, 0.0), &RamseyOptions::default()).is_err());
    }
}
