use thiserror::Error;

use super::engine::AttemptOutcome;
use super::herald::{Detector, TimeBin};
use crate::event_stream::{Channel, TimeTagRecord};
use crate::physics::ProtocolParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EventTimingError {
    #[error("attempt period {period_ps} ps cannot hold the early mark, tau and detection gate ({needed_ps} ps)")]
    PeriodTooShort { period_ps: u64, needed_ps: u64 },
}

/// Layout of one attempt in a time-tag log.
///
/// Attempt k starts with a SYNC at k·period, the early excitation mark
/// follows `sync_to_early_ps` later and the late mark τ after that. A photon
/// is tagged at its mark plus `optical_delay_ps` plus its arrival offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventTiming {
    pub period_ps: u64,
    pub sync_to_early_ps: u64,
    pub optical_delay_ps: u64,
    pub tau_ps: u64,
}

const GATE_MARGIN_PS: u64 = 2_000_000;

impl EventTiming {
    pub fn from_protocol(protocol: &ProtocolParams) -> Result<Self, EventTimingError> {
        let t = Self {
            period_ps: (1e12 / protocol.rep_rate_hz).round() as u64,
            sync_to_early_ps: 1_000_000,
            optical_delay_ps: 50_000,
            tau_ps: (protocol.tau_s * 1e12).round() as u64,
        };
        let needed_ps = t.sync_to_early_ps + t.tau_ps + GATE_MARGIN_PS;
        if needed_ps > t.period_ps {
            return Err(EventTimingError::PeriodTooShort {
                period_ps: t.period_ps,
                needed_ps,
            });
        }
        Ok(t)
    }

    fn mark_ps(&self, attempt: u64, bin: TimeBin) -> u64 {
        let early = attempt * self.period_ps + self.sync_to_early_ps;
        match bin {
            TimeBin::Early => early,
            TimeBin::Late => early + self.tau_ps,
        }
    }

    /// Appends SYNC, both excitation marks and all detections of one attempt,
    /// sorted by time. Attempt ids wrap at 2³².
    pub fn append_attempt(&self, attempt: u64, outcome: &AttemptOutcome, out: &mut Vec<TimeTagRecord>) {
        let id = attempt as u32;
        let rec = |t_ps: u64, channel: Channel| TimeTagRecord {
            t_ps,
            attempt_id: id,
            channel,
            kind: 0,
        };
        let start = out.len();
        out.push(rec(attempt * self.period_ps, Channel::Sync));
        out.push(rec(self.mark_ps(attempt, TimeBin::Early), Channel::ExcEarly));
        out.push(rec(self.mark_ps(attempt, TimeBin::Late), Channel::ExcLate));
        for d in &outcome.detections {
            let offset_ps = (d.offset_s * 1e12).round().max(0.0) as u64;
            let t = self.mark_ps(attempt, d.bin) + self.optical_delay_ps + offset_ps;
            let ch = match d.detector {
                Detector::D0 => Channel::Apd0,
                Detector::D1 => Channel::Apd1,
            };
            out.push(rec(t, ch));
        }
        out[start..].sort_by_key(|r| (r.t_ps, r.channel as u8));
    }
}
