use rayon::prelude::*;
use serde::Serialize;

use super::frame::{AttemptFrame, TaggedDetection};
use crate::monte_carlo::{herald_from_deviation, HeraldResult, RejectReason};

/// How the coincidence window is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowRule {
    /// |τ* − τ| ≤ δt on the early→late interval.
    #[default]
    Difference,
    /// Each detection within ±δt of its bin's mean arrival time.
    PerBin,
}

/// Fixed delays between marks and detections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ArrivalCalibration {
    /// Mean mark-to-detection delay of the early and late bin.
    pub bin_offset_ps: [i64; 2],
    /// Extra delay of detector 0 and detector 1.
    pub channel_offset_ps: [i64; 2],
}

impl ArrivalCalibration {
    /// Estimates delays from frames with exactly one detection per bin:
    /// bin offsets are mean delays after each mark, the channel offset of
    /// detector 1 is its mean delay relative to detector 0.
    pub fn estimate(frames: &[AttemptFrame]) -> Self {
        let mut bin_sum = [0i128; 2];
        let mut bin_n = [0i128; 2];
        let mut ch_sum = [0i128; 2];
        let mut ch_n = [0i128; 2];
        for f in frames.iter().filter(|f| f.is_complete()) {
            if f.early.len() != 1 || f.late.len() != 1 {
                continue;
            }
            let marks = [f.early_mark_ps.unwrap_or(0), f.late_mark_ps.unwrap_or(0)];
            for (b, d) in [f.early[0], f.late[0]].iter().enumerate() {
                let delay = d.t_ps as i128 - marks[b] as i128;
                bin_sum[b] += delay;
                bin_n[b] += 1;
                ch_sum[d.detector.index()] += delay;
                ch_n[d.detector.index()] += 1;
            }
        }
        let mean = |s: i128, n: i128| if n == 0 { 0 } else { (s as f64 / n as f64).round() as i64 };
        let ch = [mean(ch_sum[0], ch_n[0]), mean(ch_sum[1], ch_n[1])];
        let channel_offset_ps = if ch_n[0] > 0 && ch_n[1] > 0 { [0, ch[1] - ch[0]] } else { [0, 0] };
        Self {
            bin_offset_ps: [mean(bin_sum[0], bin_n[0]), mean(bin_sum[1], bin_n[1])],
            channel_offset_ps,
        }
    }

    /// Detection time relative to its bin's expected arrival.
    fn relative_ps(&self, d: &TaggedDetection, mark_ps: u64, bin: usize, per_bin: bool) -> i64 {
        let base = d.t_ps as i64 - mark_ps as i64 - self.channel_offset_ps[d.detector.index()];
        if per_bin {
            base - self.bin_offset_ps[bin]
        } else {
            base
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyOptions {
    pub delta_t_s: f64,
    pub rule: WindowRule,
    pub calibration: ArrivalCalibration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameResult {
    pub frame: usize,
    pub attempt_id: u32,
    pub herald: HeraldResult,
    /// Late-minus-early relative arrival for one-early-one-late frames.
    pub deviation_s: Option<f64>,
}

/// Classifies one frame; incomplete frames give `None`.
pub fn classify_frame(frame: &AttemptFrame, opts: &ClassifyOptions) -> Option<FrameResult> {
    if !frame.is_complete() {
        return None;
    }
    let (herald, deviation_s) = match (frame.early.len(), frame.late.len()) {
        (1, 1) => {
            let per_bin = opts.rule == WindowRule::PerBin;
            let cal = &opts.calibration;
            let e = cal.relative_ps(&frame.early[0], frame.early_mark_ps?, 0, per_bin);
            let l = cal.relative_ps(&frame.late[0], frame.late_mark_ps?, 1, per_bin);
            let dev = (l - e) as f64 * 1e-12;
            let h = match opts.rule {
                WindowRule::Difference => {
                    herald_from_deviation(frame.early[0].detector, frame.late[0].detector, dev, opts.delta_t_s)
                }
                WindowRule::PerBin => {
                    let limit = opts.delta_t_s * 1e12;
                    if (e as f64).abs() > limit || (l as f64).abs() > limit {
                        HeraldResult::Rejected(RejectReason::OutOfWindow)
                    } else {
                        herald_from_deviation(frame.early[0].detector, frame.late[0].detector, 0.0, f64::INFINITY)
                    }
                }
            };
            (h, Some(dev))
        }
        (e, l) if e >= 2 || l >= 2 => (HeraldResult::Rejected(RejectReason::SameBin), None),
        _ => (HeraldResult::Rejected(RejectReason::MissingPhoton), None),
    };
    Some(FrameResult {
        frame: frame.index,
        attempt_id: frame.attempt_id,
        herald,
        deviation_s,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ClassificationSummary {
    pub frames: u64,
    /// Frames without both excitation marks.
    pub excluded: u64,
    pub psi_plus: u64,
    pub psi_minus: u64,
    pub same_bin: u64,
    pub missing_photon: u64,
    pub out_of_window: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub results: Vec<FrameResult>,
    pub summary: ClassificationSummary,
}

/// Classifies all frames in parallel; results keep frame order.
pub fn classify_frames(frames: &[AttemptFrame], opts: &ClassifyOptions) -> Classification {
    let results: Vec<FrameResult> = frames
        .par_iter()
        .filter_map(|f| classify_frame(f, opts))
        .collect();
    let mut s = ClassificationSummary {
        frames: frames.len() as u64,
        excluded: (frames.len() - results.len()) as u64,
        ..Default::default()
    };
    for r in &results {
        match r.herald {
            HeraldResult::PsiPlus => s.psi_plus += 1,
            HeraldResult::PsiMinus => s.psi_minus += 1,
            HeraldResult::Rejected(RejectReason::SameBin) => s.same_bin += 1,
            HeraldResult::Rejected(RejectReason::MissingPhoton) => s.missing_photon += 1,
            HeraldResult::Rejected(RejectReason::OutOfWindow) => s.out_of_window += 1,
            HeraldResult::ErasureFlagged => {}
        }
    }
    Classification { results, summary: s }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YieldPoint {
    pub delta_t_s: f64,
    /// Complete frames with one early and one late detection.
    pub candidates: u64,
    pub accepted: u64,
    pub yield_frac: f64,
    pub std_err: f64,
}

/// Fraction of one-early-one-late frames accepted at each window.
pub fn yield_sweep(
    frames: &[AttemptFrame],
    calibration: &ArrivalCalibration,
    rule: WindowRule,
    delta_ts_s: &[f64],
) -> Vec<YieldPoint> {
    let candidates: Vec<&AttemptFrame> = frames
        .iter()
        .filter(|f| f.is_complete() && f.early.len() == 1 && f.late.len() == 1)
        .collect();
    let n = candidates.len() as u64;
    delta_ts_s
        .iter()
        .map(|&delta_t_s| {
            let opts = ClassifyOptions {
                delta_t_s,
                rule,
                calibration: *calibration,
            };
            let accepted = candidates
                .par_iter()
                .filter(|f| classify_frame(f, &opts).is_some_and(|r| r.herald.is_herald()))
                .count() as u64;
            let y = if n == 0 { 0.0 } else { accepted as f64 / n as f64 };
            YieldPoint {
                delta_t_s,
                candidates: n,
                accepted,
                yield_frac: y,
                std_err: if n == 0 { 0.0 } else { (y * (1.0 - y) / n as f64).sqrt() },
            }
        })
        .collect()
}
