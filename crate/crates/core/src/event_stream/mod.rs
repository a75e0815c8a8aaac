//! Time-tagger event logs: codecs, attempt framing and herald classification.
//!
//! Binary record layout, little-endian, 16 bytes:
//!
//! | bytes | field        |
//! |-------|--------------|
//! | 0..8  | `t_ps` (u64) |
//! | 8..12 | attempt id (u32) |
//! | 12    | channel code (u8) |
//! | 13    | kind (u8)    |
//! | 14..16| reserved, must be 0 |
//!
//! Channel codes: 0 and 1 are the two detectors, 16 is SYNC, 17 and 18 the
//! early and late excitation marks. The CSV form has the header
//! `attempt_id,channel,t_ps` and no kind column.

mod classify;
mod frame;
mod record;

pub use classify::{
    classify_frame, classify_frames, yield_sweep, ArrivalCalibration, ClassifyOptions,
    Classification, ClassificationSummary, FrameResult, WindowRule, YieldPoint,
};
pub use frame::{frame_attempts, AttemptFrame, FrameWarning, Framing, TaggedDetection};
pub use record::{
    decode_binary, decode_csv, encode_binary, encode_csv, parse_stream, BinaryReader, Channel,
    Location, StreamError, StreamFormat, TimeTagRecord, RECORD_BYTES,
};
