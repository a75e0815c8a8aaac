use serde::Serialize;

use super::PlannerError;
use crate::physics::{contrast_timebin, TrapMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauTuning {
    pub tau_s: f64,
    /// C′ at `tau_s`.
    pub c_timebin: f64,
    /// Grid point with the largest C′ before refinement.
    pub grid_tau_s: f64,
    pub grid_points: usize,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Maximizes C′(τ) over [lo, hi]: grid search at `resolution_s`, then
/// golden-section refinement inside the bracketing grid cells. Among equal
/// values the smallest τ wins.
pub fn tune_tau(modes: &[TrapMode], range_s: (f64, f64), resolution_s: f64) -> Result<TauTuning, PlannerError> {
    let (lo, hi) = range_s;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
        return Err(PlannerError::InvalidRange { lo, hi });
    }
    if !(resolution_s > 0.0) || !resolution_s.is_finite() {
        return Err(PlannerError::InvalidResolution(resolution_s));
    }
    let c = |tau: f64| contrast_timebin(modes, tau).0;
    let n = ((hi - lo) / resolution_s).floor() as usize + 1;
    let mut best = (lo, c(lo));
    let mut best_i = 0;
    for i in 1..n {
        let tau = lo + i as f64 * resolution_s;
        let v = c(tau);
        if v > best.1 {
            best = (tau, v);
            best_i = i;
        }
    }
    let grid = best;
    let mut a = (lo + best_i.saturating_sub(1) as f64 * resolution_s).max(lo);
    let mut b = (lo + (best_i + 1) as f64 * resolution_s).min(hi);
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (c(x1), c(x2));
    for _ in 0..200 {
        if b - a <= 1e-9 * resolution_s {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = c(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = c(x2);
        }
    }
    let refined = 0.5 * (a + b);
    let rv = c(refined);
    if rv > best.1 {
        best = (refined, rv);
    }
    Ok(TauTuning {
        tau_s: best.0,
        c_timebin: best.1,
        grid_tau_s: grid.0,
        grid_points: n,
    })
}
