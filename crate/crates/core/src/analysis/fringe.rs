use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use super::AnalysisError;

/// Parity measured at one analysis phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityPoint {
    pub phase_rad: f64,
    pub n_shots: u64,
    /// Shots with anti-aligned spins; parity = (even − odd)/shots.
    pub n_odd: u64,
}

impl ParityPoint {
    pub fn parity(&self) -> f64 {
        1.0 - 2.0 * self.n_odd as f64 / self.n_shots as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetMode {
    #[default]
    Free,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityFitOptions {
    pub offset: OffsetMode,
    /// Fit only the amplitude at this fringe phase.
    pub fixed_phase_rad: Option<f64>,
    pub max_iterations: usize,
}

impl Default for ParityFitOptions {
    fn default() -> Self {
        Self {
            offset: OffsetMode::Free,
            fixed_phase_rad: None,
            max_iterations: 50,
        }
    }
}

/// Result of fitting P(φ) = C·cos(φ − φ₀) + b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeFit {
    /// Reported contrast, ≥ 0 and with C + |b| ≤ 1.
    pub contrast: f64,
    pub contrast_se: f64,
    /// φ₀ in (−π, π].
    pub phase_rad: f64,
    pub phase_se: f64,
    pub offset: f64,
    pub offset_se: f64,
    /// Unclamped amplitude; signed when the phase is fixed.
    pub amplitude: f64,
    pub chi2: f64,
    pub dof: usize,
    /// All parities equal: no fringe, phase undefined.
    pub degenerate: bool,
    /// Contrast was reduced to respect C + |b| ≤ 1.
    pub clamped: bool,
}

fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Distinct phases mod 2π and the arc they span (2π minus the largest gap).
fn phase_coverage(points: &[ParityPoint]) -> (usize, f64) {
    let mut ph: Vec<f64> = points.iter().map(|p| p.phase_rad.rem_euclid(TAU)).collect();
    ph.sort_by(f64::total_cmp);
    ph.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if ph.len() > 1 && (ph[0] + TAU - ph[ph.len() - 1]) < 1e-9 {
        ph.pop();
    }
    if ph.len() < 2 {
        return (ph.len(), 0.0);
    }
    let mut max_gap = ph[0] + TAU - ph[ph.len() - 1];
    for w in ph.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }
    (ph.len(), TAU - max_gap)
}

/// Weighted least-squares fit of a parity fringe.
///
/// The model is linear in (C·cos φ₀, C·sin φ₀, b). Weights are iterated with
/// the binomial variance of the fitted parity, var = max(1 − m², 1/n)/n,
/// starting from shot-count weights. Standard errors come from the inverse
/// normal matrix by the delta method.
pub fn fit_parity(points: &[ParityPoint], opts: &ParityFitOptions) -> Result<FringeFit, AnalysisError> {
    let pts: Vec<ParityPoint> = points.iter().copied().filter(|p| p.n_shots > 0).collect();
    if let Some(p) = pts.iter().find(|p| p.n_odd > p.n_shots || !p.phase_rad.is_finite()) {
        return Err(AnalysisError::InvalidData(format!(
            "point at phase {} has {} odd outcomes in {} shots",
            p.phase_rad, p.n_odd, p.n_shots
        )));
    }
    let (distinct, span_rad) = phase_coverage(&pts);
    if distinct < 4 || span_rad < PI - 1e-9 {
        return Err(AnalysisError::InsufficientPhaseCoverage { distinct, span_rad });
    }
    let free_offset = opts.offset == OffsetMode::Free;
    let n_par = match opts.fixed_phase_rad {
        Some(_) => 1,
        None => 2,
    } + usize::from(free_offset);
    let rows = pts.len();
    let mut x = DMatrix::<f64>::zeros(rows, n_par);
    for (i, p) in pts.iter().enumerate() {
        let c = match opts.fixed_phase_rad {
            Some(f) => {
                x[(i, 0)] = (p.phase_rad - f).cos();
                1
            }
            None => {
                x[(i, 0)] = p.phase_rad.cos();
                x[(i, 1)] = p.phase_rad.sin();
                2
            }
        };
        if free_offset {
            x[(i, c)] = 1.0;
        }
    }
    let y = DVector::from_iterator(rows, pts.iter().map(ParityPoint::parity));
    let shots = DVector::from_iterator(rows, pts.iter().map(|p| p.n_shots as f64));

    let solve = |w: &DVector<f64>| -> Result<(DVector<f64>, DMatrix<f64>), AnalysisError> {
        let xtw = x.transpose() * DMatrix::from_diagonal(w);
        let normal = &xtw * &x;
        let inv = normal
            .clone()
            .try_inverse()
            .ok_or_else(|| AnalysisError::InvalidData("singular normal matrix".into()))?;
        Ok((&inv * (&xtw * &y), inv))
    };

    let mut w = shots.clone();
    let (mut beta, mut cov) = solve(&w)?;
    for _ in 0..opts.max_iterations {
        let m = &x * &beta;
        w = DVector::from_iterator(
            rows,
            (0..rows).map(|i| {
                let mi = m[i].clamp(-1.0, 1.0);
                let n = shots[i];
                n / (1.0 - mi * mi).max(1.0 / n)
            }),
        );
        let (next, next_cov) = solve(&w)?;
        let change = (&next - &beta).amax();
        beta = next;
        cov = next_cov;
        if change < 1e-14 {
            break;
        }
    }
    let resid = &y - &x * &beta;
    let chi2: f64 = (0..rows).map(|i| w[i] * resid[i] * resid[i]).sum();
    let (offset, offset_se) = if free_offset {
        (beta[n_par - 1], cov[(n_par - 1, n_par - 1)].sqrt())
    } else {
        (0.0, 0.0)
    };
    let (amplitude, contrast_se, phase_rad, phase_se) = match opts.fixed_phase_rad {
        Some(f) => (beta[0], cov[(0, 0)].sqrt(), wrap_phase(f), 0.0),
        None => {
            let (a, s) = (beta[0], beta[1]);
            let c = a.hypot(s);
            if c > 0.0 {
                let ga = [a / c, s / c];
                let gp = [-s / (c * c), a / (c * c)];
                let quad = |g: [f64; 2]| {
                    (g[0] * g[0] * cov[(0, 0)] + 2.0 * g[0] * g[1] * cov[(0, 1)] + g[1] * g[1] * cov[(1, 1)]).sqrt()
                };
                (c, quad(ga), wrap_phase(s.atan2(a)), quad(gp))
            } else {
                (0.0, (0.5 * (cov[(0, 0)] + cov[(1, 1)])).sqrt(), 0.0, PI)
            }
        }
    };
    let degenerate = y.max() - y.min() < 1e-12;
    let mut contrast = if degenerate { 0.0 } else { amplitude.max(0.0) };
    let clamped = contrast + offset.abs() > 1.0 + 1e-12;
    if clamped {
        contrast = (1.0 - offset.abs()).max(0.0);
    }
    Ok(FringeFit {
        contrast,
        contrast_se,
        phase_rad: if degenerate { 0.0 } else { phase_rad },
        phase_se,
        offset,
        offset_se,
        amplitude,
        chi2,
        dof: rows.saturating_sub(n_par),
        degenerate,
        clamped,
    })
}
