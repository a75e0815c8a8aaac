use rayon::prelude::*;
use serde::Serialize;

use super::{BellStateModel, PlannerError};
use crate::physics::{
    contrast_arrival, contrast_timebin, window_stats, BeamGeometry, DopplerSettings, NodeSpec, TrapMode,
};

/// Sampled curve with an optional (low, high) band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub label: String,
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub band: Option<Vec<(f64, f64)>>,
}

impl SweepCurve {
    /// CSV with columns x,y and, if present, lo,hi.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(if self.band.is_some() { "x,y,lo,hi\n" } else { "x,y\n" });
        for i in 0..self.x.len() {
            match &self.band {
                Some(b) => s.push_str(&format!("{},{},{},{}\n", self.x[i], self.y[i], b[i].0, b[i].1)),
                None => s.push_str(&format!("{},{}\n", self.x[i], self.y[i])),
            }
        }
        s
    }
}

/// Seconds to nanoseconds, rounded to the femtosecond so grid abscissae
/// print without binary noise.
fn to_ns(s: f64) -> f64 {
    (s * 1e15).round() / 1e6
}

fn check_increasing(xs: &[f64]) -> Result<(), PlannerError> {
    if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PlannerError::UnsortedAbscissae);
    }
    Ok(())
}

/// Motional modes of both nodes at one cooling level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoolingLevel {
    pub label: String,
    pub modes: Vec<TrapMode>,
}

/// The three cooling levels compared in the τ sweep:
/// configured n̄ (`Dopp_exp`), the Doppler limit with equal beam projection
/// cos²θ = 1/3 on every axis, i.e. twice the isotropic part (`Dopp_opt`),
/// and the motional ground state (`zero_point`).
pub fn cooling_levels(nodes: &[NodeSpec; 2], doppler: &DopplerSettings) -> Result<Vec<CoolingLevel>, PlannerError> {
    let exp: Vec<TrapMode> = nodes.iter().flat_map(|n| n.modes.iter().copied()).collect();
    let mut opt = Vec::with_capacity(exp.len());
    for n in nodes {
        for m in &n.modes {
            let nbar = 2.0 * doppler.isotropic_part(m.freq_hz, n.emitter.gamma())?;
            opt.push(TrapMode { nbar, ..*m });
        }
    }
    let zero = exp.iter().map(|m| TrapMode { nbar: 0.0, ..*m }).collect();
    Ok(vec![
        CoolingLevel {
            label: "Dopp_exp".into(),
            modes: exp,
        },
        CoolingLevel {
            label: "Dopp_opt".into(),
            modes: opt,
        },
        CoolingLevel {
            label: "zero_point".into(),
            modes: zero,
        },
    ])
}

/// C′(τ) per cooling level on [lo, hi] in steps of `step_s`, each curve
/// rescaled to a maximum of 1.
pub fn sweep_tau(levels: &[CoolingLevel], range_s: (f64, f64), step_s: f64) -> Result<Vec<SweepCurve>, PlannerError> {
    let (lo, hi) = range_s;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
        return Err(PlannerError::InvalidRange { lo, hi });
    }
    if !(step_s > 0.0) || !step_s.is_finite() {
        return Err(PlannerError::InvalidResolution(step_s));
    }
    let n = ((hi - lo) / step_s).floor() as usize + 1;
    let taus: Vec<f64> = (0..n).map(|i| lo + i as f64 * step_s).collect();
    Ok(levels
        .iter()
        .map(|level| {
            let raw: Vec<f64> = taus.par_iter().map(|&t| contrast_timebin(&level.modes, t).0).collect();
            let max = raw.iter().copied().fold(0.0, f64::max);
            SweepCurve {
                label: level.label.clone(),
                x_label: "tau_ns".into(),
                y_label: "c_timebin_rescaled".into(),
                x: taus.iter().map(|&t| to_ns(t)).collect(),
                y: raw.iter().map(|c| if max > 0.0 { c / max } else { 0.0 }).collect(),
                band: None,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowRow {
    pub delta_t_ns: f64,
    pub w: f64,
    pub big_w: f64,
    pub yield_y: f64,
    pub c_arrival: f64,
    /// F(δt)/F(0).
    pub fidelity_rel: f64,
    pub fidelity_lo: f64,
    pub fidelity_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSweep {
    pub fidelity: SweepCurve,
    pub yield_curve: SweepCurve,
    pub rows: Vec<WindowRow>,
}

/// Node copies with α and β each shifted by −u, 0, +u; n̄ is held fixed.
fn perturbed_nodes(nodes: &[NodeSpec; 2], u: f64) -> Result<Vec<Vec<TrapMode>>, PlannerError> {
    let shifts: &[f64] = if u == 0.0 { &[0.0] } else { &[-u, 0.0, u] };
    let variants = |n: &NodeSpec| -> Result<Vec<NodeSpec>, PlannerError> {
        let mut v = Vec::new();
        for &da in shifts {
            for &db in shifts {
                let g = BeamGeometry {
                    alpha_deg: n.geometry.alpha_deg + da,
                    beam_tilt_deg: n.geometry.beam_tilt_deg + db,
                };
                if g.validate().is_ok() {
                    v.push(n.with_geometry(g)?);
                }
            }
        }
        Ok(v)
    };
    let (va, vb) = (variants(&nodes[0])?, variants(&nodes[1])?);
    let mut out = Vec::with_capacity(va.len() * vb.len());
    for a in &va {
        for b in &vb {
            out.push(a.modes.iter().chain(b.modes.iter()).copied().collect());
        }
    }
    Ok(out)
}

/// Relative fidelity F(δt)/F(0) = (P_odd + C₀·C″(δt))/(P_odd + C₀) with a
/// band from beam-angle uncertainty, and the window yield Y(δt).
pub fn sweep_window(
    nodes: &[NodeSpec; 2],
    delta_ts_s: &[f64],
    angle_uncertainty_deg: f64,
    state: &BellStateModel,
) -> Result<WindowSweep, PlannerError> {
    check_increasing(delta_ts_s)?;
    let tau_r = nodes[0].emitter.tau_r_s;
    let modes: Vec<TrapMode> = nodes.iter().flat_map(|n| n.modes.iter().copied()).collect();
    let variants = perturbed_nodes(nodes, angle_uncertainty_deg.abs())?;
    let rel = |c: f64| (state.p_odd + state.base_contrast * c) / (state.p_odd + state.base_contrast);
    let rows: Vec<WindowRow> = delta_ts_s
        .par_iter()
        .map(|&dt| {
            let ws = window_stats(dt, tau_r);
            let c = contrast_arrival(&modes, tau_r, ws.big_w);
            let (mut lo, mut hi) = (rel(c), rel(c));
            for v in &variants {
                let f = rel(contrast_arrival(v, tau_r, ws.big_w));
                lo = lo.min(f);
                hi = hi.max(f);
            }
            WindowRow {
                delta_t_ns: to_ns(dt),
                w: ws.w,
                big_w: ws.big_w,
                yield_y: ws.yield_y,
                c_arrival: c,
                fidelity_rel: rel(c),
                fidelity_lo: lo,
                fidelity_hi: hi,
            }
        })
        .collect();
    let x: Vec<f64> = rows.iter().map(|r| r.delta_t_ns).collect();
    Ok(WindowSweep {
        fidelity: SweepCurve {
            label: "fidelity".into(),
            x_label: "delta_t_ns".into(),
            y_label: "fidelity_relative".into(),
            x: x.clone(),
            y: rows.iter().map(|r| r.fidelity_rel).collect(),
            band: Some(rows.iter().map(|r| (r.fidelity_lo, r.fidelity_hi)).collect()),
        },
        yield_curve: SweepCurve {
            label: "yield".into(),
            x_label: "delta_t_ns".into(),
            y_label: "yield".into(),
            x,
            y: rows.iter().map(|r| r.yield_y).collect(),
            band: None,
        },
        rows,
    })
}
