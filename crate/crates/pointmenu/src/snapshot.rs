//! Per-frame state published to UI clients, and the binary frame framing.

use pointmenu_core::{Blob, Frame, GestureEvent};
use serde::Serialize;

use crate::config::Tunables;
use crate::control::CommandRecord;

/// Events kept in each snapshot.
pub const RECENT_EVENTS: usize = 32;

pub const FRAME_MAGIC: &[u8; 4] = b"FRME";
pub const FRAME_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlobSummary {
    pub label: u32,
    pub area: usize,
    pub centroid: [f64; 2],
    pub bbox: [usize; 4],
}

impl From<&Blob> for BlobSummary {
    fn from(b: &Blob) -> Self {
        BlobSummary {
            label: b.label,
            area: b.area,
            centroid: [b.centroid.0, b.centroid.1],
            bbox: [b.bbox.0, b.bbox.1, b.bbox.2, b.bbox.3],
        }
    }
}

/// Microseconds spent in each stage of one frame.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StageLatencies {
    pub blur: u64,
    pub threshold: u64,
    pub label: u64,
    pub select: u64,
    pub track: u64,
    /// Blur through dwell tracking.
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSnapshot {
    pub frame_seq: u64,
    pub timestamp_ms: u64,
    pub width: usize,
    pub height: usize,
    pub blobs: Vec<BlobSummary>,
    pub pointer: Option<[f64; 2]>,
    pub hovered: Option<String>,
    pub dwell_progress: f64,
    pub recent_events: Vec<GestureEvent>,
    pub last_command: Option<CommandRecord>,
    pub latencies_us: StageLatencies,
    pub config: Tunables,
}

impl StateSnapshot {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("snapshot serializes")
    }
}

/// `FRME`, big-endian u32 width, height and frame sequence, then raw RGB.
pub fn encode_frame_message(frame: &Frame, frame_seq: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + frame.as_bytes().len());
    out.extend_from_slice(FRAME_MAGIC);
    out.extend_from_slice(&(frame.width() as u32).to_be_bytes());
    out.extend_from_slice(&(frame.height() as u32).to_be_bytes());
    out.extend_from_slice(&(frame_seq as u32).to_be_bytes());
    out.extend_from_slice(frame.as_bytes());
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FramingError {
    #[error("bad magic {0:?}")]
    Magic([u8; 4]),
    #[error("message is {actual} bytes, header implies {expected}")]
    Length { expected: usize, actual: usize },
}

/// Splits a binary message into `(width, height, frame_seq, rgb)`.
pub fn decode_frame_message(msg: &[u8]) -> Result<(u32, u32, u32, &[u8]), FramingError> {
    if msg.len() < FRAME_HEADER_LEN {
        return Err(FramingError::Length {
            expected: FRAME_HEADER_LEN,
            actual: msg.len(),
        });
    }
    let word = |i: usize| u32::from_be_bytes(msg[i..i + 4].try_into().unwrap());
    if &msg[..4] != FRAME_MAGIC {
        return Err(FramingError::Magic(msg[..4].try_into().unwrap()));
    }
    let (w, h, seq) = (word(4), word(8), word(12));
    let expected = FRAME_HEADER_LEN + 3 * w as usize * h as usize;
    if msg.len() != expected {
        return Err(FramingError::Length {
            expected,
            actual: msg.len(),
        });
    }
    Ok((w, h, seq, &msg[FRAME_HEADER_LEN..]))
}
