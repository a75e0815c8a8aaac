use std::fmt;
use std::io::{self, Read};

use serde::Serialize;
use thiserror::Error;

pub const RECORD_BYTES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[repr(u8)]
pub enum Channel {
    Apd0 = 0,
    Apd1 = 1,
    Sync = 16,
    ExcEarly = 17,
    ExcLate = 18,
}

impl Channel {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Channel::Apd0),
            1 => Some(Channel::Apd1),
            16 => Some(Channel::Sync),
            17 => Some(Channel::ExcEarly),
            18 => Some(Channel::ExcLate),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TimeTagRecord {
    pub t_ps: u64,
    pub attempt_id: u32,
    pub channel: Channel,
    pub kind: u8,
}

impl TimeTagRecord {
    pub fn to_bytes(&self) -> [u8; RECORD_BYTES] {
        let mut b = [0u8; RECORD_BYTES];
        b[0..8].copy_from_slice(&self.t_ps.to_le_bytes());
        b[8..12].copy_from_slice(&self.attempt_id.to_le_bytes());
        b[12] = self.channel.code();
        b[13] = self.kind;
        b
    }

    /// Decodes one record; `offset` is its byte position for error reports.
    pub fn from_bytes(b: &[u8; RECORD_BYTES], offset: u64) -> Result<Self, StreamError> {
        let reserved = u16::from_le_bytes([b[14], b[15]]);
        if reserved != 0 {
            return Err(StreamError::ReservedNonZero {
                value: reserved,
                location: Location::Byte(offset + 14),
            });
        }
        let channel = Channel::from_code(b[12]).ok_or(StreamError::UnknownChannel {
            code: b[12],
            location: Location::Byte(offset + 12),
        })?;
        Ok(Self {
            t_ps: u64::from_le_bytes(b[0..8].try_into().expect("8 bytes")),
            attempt_id: u32::from_le_bytes(b[8..12].try_into().expect("4 bytes")),
            channel,
            kind: b[13],
        })
    }
}

/// Position of a malformed input element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Byte(u64),
    Line(u64),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Byte(b) => write!(f, "byte {b}"),
            Location::Line(l) => write!(f, "line {l}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("truncated record at byte {offset}: {available} of {RECORD_BYTES} bytes")]
    Truncated { offset: u64, available: usize },
    #[error("unknown channel code {code} at {location}")]
    UnknownChannel { code: u8, location: Location },
    #[error("reserved field is {value:#06x} at {location}, expected 0")]
    ReservedNonZero { value: u16, location: Location },
    #[error("non-monotone SYNC at {location}: {t_ps} ps is earlier than the previous SYNC at {previous_ps} ps")]
    NonMonotoneSync {
        t_ps: u64,
        previous_ps: u64,
        location: Location,
    },
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Rejects SYNC records that go back in time.
#[derive(Debug, Default)]
struct SyncOrder {
    last: Option<u64>,
}

impl SyncOrder {
    fn check(&mut self, r: &TimeTagRecord, location: Location) -> Result<(), StreamError> {
        if r.channel != Channel::Sync {
            return Ok(());
        }
        if let Some(previous_ps) = self.last {
            if r.t_ps < previous_ps {
                return Err(StreamError::NonMonotoneSync {
                    t_ps: r.t_ps,
                    previous_ps,
                    location,
                });
            }
        }
        self.last = Some(r.t_ps);
        Ok(())
    }
}

pub fn encode_binary(records: &[TimeTagRecord]) -> Vec<u8> {
    let mut out = Vec::with_capacity(records.len() * RECORD_BYTES);
    for r in records {
        out.extend_from_slice(&r.to_bytes());
    }
    out
}

/// Streaming decoder over any reader; yields records until EOF or the first error.
pub struct BinaryReader<R: Read> {
    inner: R,
    offset: u64,
    sync: SyncOrder,
    done: bool,
}

impl<R: Read> BinaryReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            offset: 0,
            sync: SyncOrder::default(),
            done: false,
        }
    }

    fn read_record(&mut self) -> Result<Option<TimeTagRecord>, StreamError> {
        let mut buf = [0u8; RECORD_BYTES];
        let mut filled = 0;
        while filled < RECORD_BYTES {
            match self.inner.read(&mut buf[filled..]) {
                Ok(0) => break,
                Ok(n) => filled += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        if filled == 0 {
            return Ok(None);
        }
        if filled < RECORD_BYTES {
            return Err(StreamError::Truncated {
                offset: self.offset,
                available: filled,
            });
        }
        let r = TimeTagRecord::from_bytes(&buf, self.offset)?;
        self.sync.check(&r, Location::Byte(self.offset))?;
        self.offset += RECORD_BYTES as u64;
        Ok(Some(r))
    }
}

impl<R: Read> Iterator for BinaryReader<R> {
    type Item = Result<TimeTagRecord, StreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_record() {
            Ok(Some(r)) => Some(Ok(r)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

pub fn decode_binary(bytes: &[u8]) -> Result<Vec<TimeTagRecord>, StreamError> {
    BinaryReader::new(bytes).collect()
}

const CSV_HEADER: [&str; 3] = ["attempt_id", "channel", "t_ps"];

pub fn encode_csv(records: &[TimeTagRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in records {
        w.write_record(&[r.attempt_id.to_string(), r.channel.code().to_string(), r.t_ps.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

/// Decodes the CSV form. The kind byte is not represented and decodes as 0.
pub fn decode_csv(text: &str) -> Result<Vec<TimeTagRecord>, StreamError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let csv_err = |line: u64, message: String| StreamError::Csv { line, message };
    let headers = rdr.headers().map_err(|e| csv_err(1, e.to_string()))?;
    if headers.iter().map(str::trim).ne(CSV_HEADER) {
        return Err(csv_err(1, format!("expected header {}", CSV_HEADER.join(","))));
    }
    let mut sync = SyncOrder::default();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(csv_err(line, format!("expected 3 fields, found {}", rec.len())));
        }
        let field = |i: usize| rec[i].trim();
        let attempt_id: u32 = field(0)
            .parse()
            .map_err(|e| csv_err(line, format!("attempt_id {:?}: {e}", field(0))))?;
        let code: u8 = field(1)
            .parse()
            .map_err(|e| csv_err(line, format!("channel {:?}: {e}", field(1))))?;
        let t_ps: u64 = field(2)
            .parse()
            .map_err(|e| csv_err(line, format!("t_ps {:?}: {e}", field(2))))?;
        let channel = Channel::from_code(code).ok_or(StreamError::UnknownChannel {
            code,
            location: Location::Line(line),
        })?;
        let r = TimeTagRecord {
            t_ps,
            attempt_id,
            channel,
            kind: 0,
        };
        sync.check(&r, Location::Line(line))?;
        out.push(r);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamFormat {
    Binary,
    Csv,
}

impl StreamFormat {
    /// CSV if the input starts with the CSV header, binary otherwise.
    pub fn detect(bytes: &[u8]) -> Self {
        if bytes.starts_with(b"attempt_id") {
            StreamFormat::Csv
        } else {
            StreamFormat::Binary
        }
    }
}

pub fn parse_stream(bytes: &[u8], format: StreamFormat) -> Result<Vec<TimeTagRecord>, StreamError> {
    match format {
        StreamFormat::Binary => decode_binary(bytes),
        StreamFormat::Csv => {
            let text = std::str::from_utf8(bytes).map_err(|e| StreamError::Csv {
                line: 0,
                message: format!("input is not UTF-8: {e}"),
            })?;
            decode_csv(text)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(t_ps: u64, attempt_id: u32, channel: Channel) -> TimeTagRecord {
        TimeTagRecord {
            t_ps,
            attempt_id,
            channel,
            kind: 0,
        }
    }

    #[test]
    fn layout_is_little_endian() {
        let b = rec(0x0102, 7, Channel::ExcLate).to_bytes();
        assert_eq!(&b[..], &[2, 1, 0, 0, 0, 0, 0, 0, 7, 0, 0, 0, 18, 0, 0, 0]);
    }

    #[test]
    fn truncated_tail_reports_offset() {
        let mut bytes = encode_binary(&[rec(1, 0, Channel::Sync)]);
        bytes.extend_from_slice(&[0; 5]);
        match decode_binary(&bytes) {
            Err(StreamError::Truncated { offset, available }) => assert_eq!((offset, available), (16, 5)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_channel_and_reserved_bits() {
        let mut b = rec(1, 0, Channel::Sync).to_bytes();
        b[12] = 3;
        assert!(matches!(
            decode_binary(&b),
            Err(StreamError::UnknownChannel {
                code: 3,
                location: Location::Byte(12)
            })
        ));
        let mut b = rec(1, 0, Channel::Sync).to_bytes();
        b[15] = 1;
        assert!(matches!(decode_binary(&b), Err(StreamError::ReservedNonZero { .. })));
    }

    #[test]
    fn sync_must_not_go_back() {
        let bytes = encode_binary(&[rec(10, 0, Channel::Sync), rec(5, 1, Channel::Sync)]);
        assert!(matches!(
            decode_binary(&bytes),
            Err(StreamError::NonMonotoneSync {
                location: Location::Byte(16),
                ..
            })
        ));
        let text = "attempt_id,channel,t_ps\n0,16,10\n1,16,5\n";
        assert!(matches!(
            decode_csv(text),
            Err(StreamError::NonMonotoneSync {
                location: Location::Line(3),
                ..
            })
        ));
    }

    #[test]
    fn csv_errors_carry_line() {
        let text = "attempt_id,channel,t_ps\n0,16,10\n1,x,5\n";
        match decode_csv(text) {
            Err(StreamError::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(decode_csv("a,b,c\n"), Err(StreamError::Csv { line: 1, .. })));
        assert!(matches!(
            decode_csv("attempt_id,channel,t_ps\n0,9,1\n"),
            Err(StreamError::UnknownChannel {
                code: 9,
                location: Location::Line(2)
            })
        ));
    }

    #[test]
    fn format_detection() {
        assert_eq!(StreamFormat::detect(b"attempt_id,channel,t_ps\n"), StreamFormat::Csv);
        assert_eq!(StreamFormat::detect(&[0u8; 16]), StreamFormat::Binary);
    }

    fn channel() -> impl Strategy<Value = Channel> {
        prop_oneof![
            Just(Channel::Apd0),
            Just(Channel::Apd1),
            Just(Channel::Sync),
            Just(Channel::ExcEarly),
            Just(Channel::ExcLate)
        ]
    }

    proptest! {
        #[test]
        fn binary_round_trip(recs in prop::collection::vec((any::<u64>(), any::<u32>(), channel(), any::<u8>()), 0..50)) {
            let mut sync_t = 0u64;
            let records: Vec<TimeTagRecord> = recs
                .into_iter()
                .map(|(t, id, ch, kind)| {
                    let t_ps = if ch == Channel::Sync { sync_t = sync_t.saturating_add(t % 1_000_000); sync_t } else { t };
                    TimeTagRecord { t_ps, attempt_id: id, channel: ch, kind }
                })
                .collect();
            let back = decode_binary(&encode_binary(&records)).unwrap();
            prop_assert_eq!(&back, &records);
            let csv_back = decode_csv(&encode_csv(&records)).unwrap();
            let no_kind: Vec<_> = records.iter().map(|r| TimeTagRecord { kind: 0, ..*r }).collect();
            prop_assert_eq!(csv_back, no_kind);
        }
    }
}
