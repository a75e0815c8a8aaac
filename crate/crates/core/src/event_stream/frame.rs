use serde::Serialize;

use super::record::{Channel, TimeTagRecord};
use crate::monte_carlo::Detector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TaggedDetection {
    pub detector: Detector,
    pub t_ps: u64,
}

/// Records belonging to one SYNC.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttemptFrame {
    /// Position of the SYNC among all SYNC records.
    pub index: usize,
    pub attempt_id: u32,
    pub sync_ps: u64,
    pub early_mark_ps: Option<u64>,
    pub late_mark_ps: Option<u64>,
    /// Detections at or after the early mark and before the late mark.
    pub early: Vec<TaggedDetection>,
    /// Detections at or after the late mark.
    pub late: Vec<TaggedDetection>,
}

impl AttemptFrame {
    /// Both excitation marks present, in order.
    pub fn is_complete(&self) -> bool {
        matches!((self.early_mark_ps, self.late_mark_ps), (Some(e), Some(l)) if l >= e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "warning", rename_all = "kebab-case")]
pub enum FrameWarning {
    /// Record before the first SYNC.
    Orphan { position: usize, channel: Channel },
    /// Second mark of the same kind in one frame; the first is kept.
    DuplicateMark { frame: usize, channel: Channel },
    /// Detection earlier than the frame's early mark; dropped.
    StrayDetection { frame: usize, t_ps: u64 },
    /// Frame lacks an excitation mark and is excluded from classification.
    MissingMark { frame: usize },
    /// Record attempt id differs from its SYNC.
    IdMismatch { frame: usize, position: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Framing {
    pub frames: Vec<AttemptFrame>,
    pub warnings: Vec<FrameWarning>,
}

struct Builder {
    frame: AttemptFrame,
    raw: Vec<TaggedDetection>,
}

impl Builder {
    fn finish(mut self, warnings: &mut Vec<FrameWarning>) -> AttemptFrame {
        let f = &mut self.frame;
        if !f.is_complete() {
            warnings.push(FrameWarning::MissingMark { frame: f.index });
        }
        for d in self.raw {
            match (f.early_mark_ps, f.late_mark_ps) {
                (Some(e), _) if d.t_ps < e => warnings.push(FrameWarning::StrayDetection {
                    frame: f.index,
                    t_ps: d.t_ps,
                }),
                (_, Some(l)) if d.t_ps >= l => f.late.push(d),
                (Some(_), _) => f.early.push(d),
                (None, _) => warnings.push(FrameWarning::StrayDetection {
                    frame: f.index,
                    t_ps: d.t_ps,
                }),
            }
        }
        self.frame
    }
}

/// Groups a record stream into attempts, one per SYNC.
///
/// Malformed structure never aborts framing; it is reported as warnings and
/// the affected frames or records are excluded.
pub fn frame_attempts(records: &[TimeTagRecord]) -> Framing {
    let mut out = Framing::default();
    let mut current: Option<Builder> = None;
    for (position, r) in records.iter().enumerate() {
        if r.channel == Channel::Sync {
            if let Some(b) = current.take() {
                out.frames.push(b.finish(&mut out.warnings));
            }
            current = Some(Builder {
                frame: AttemptFrame {
                    index: out.frames.len(),
                    attempt_id: r.attempt_id,
                    sync_ps: r.t_ps,
                    early_mark_ps: None,
                    late_mark_ps: None,
                    early: Vec::new(),
                    late: Vec::new(),
                },
                raw: Vec::new(),
            });
            continue;
        }
        let Some(b) = current.as_mut() else {
            out.warnings.push(FrameWarning::Orphan {
                position,
                channel: r.channel,
            });
            continue;
        };
        if r.attempt_id != b.frame.attempt_id {
            out.warnings.push(FrameWarning::IdMismatch {
                frame: b.frame.index,
                position,
            });
        }
        let mark = match r.channel {
            Channel::ExcEarly => Some(&mut b.frame.early_mark_ps),
            Channel::ExcLate => Some(&mut b.frame.late_mark_ps),
            _ => None,
        };
        match mark {
            Some(slot) if slot.is_some() => out.warnings.push(FrameWarning::DuplicateMark {
                frame: b.frame.index,
                channel: r.channel,
            }),
            Some(slot) => *slot = Some(r.t_ps),
            None => {
                let detector = if r.channel == Channel::Apd0 { Detector::D0 } else { Detector::D1 };
                b.raw.push(TaggedDetection { detector, t_ps: r.t_ps });
            }
        }
    }
    if let Some(b) = current.take() {
        out.frames.push(b.finish(&mut out.warnings));
    }
    out
}
