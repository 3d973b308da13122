//! Error type shared by every module in the crate.

use crate::tensor::Shape;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CodecError>;

/// Everything that can go wrong while coding, containerizing, or streaming
/// feature maps.
#[derive(Debug, Error)]
pub enum CodecError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },

    #[error("unsupported version {found} (expected {expected})")]
    UnsupportedVersion { found: u8, expected: u8 },

    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u8),

    #[error("truncated {0}")]
    Truncated(&'static str),

    #[error("length mismatch in {context}: expected {expected} bytes, found {found}")]
    LengthMismatch {
        context: &'static str,
        expected: u64,
        found: u64,
    },

    #[error("empty sequence")]
    EmptySequence,

    #[error("non-finite value at frame {frame}, element {index}")]
    NonFinite { frame: u32, index: usize },

    #[error("shape mismatch: expected {expected}, got {found}")]
    ShapeMismatch { expected: Shape, found: Shape },

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("value {value} at element {index} outside [{lo}, {hi}]")]
    ValueOutOfRange {
        value: f32,
        index: usize,
        lo: f32,
        hi: f32,
    },

    #[error("symbol {symbol} not below quantization level {k}")]
    SymbolOutOfRange { symbol: u8, k: u16 },

    #[error("zero run for dominant symbol")]
    ZeroRun,

    #[error("run-length stream decoded {found} symbols, expected {expected}")]
    SymbolCountMismatch { expected: usize, found: usize },

    #[error("corrupt packet: crc mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    CrcMismatch { stored: u32, computed: u32 },

    #[error("frame index discontinuity: expected {expected}, got {found}")]
    FrameIndexGap { expected: u32, found: u32 },

    #[error("stream violates GOP: frame {frame} arrived as {kind} with period {gop_t}")]
    GopViolation {
        frame: u32,
        kind: &'static str,
        gop_t: u16,
    },

    #[error("missing reference: residual frame {0} has no prior reconstruction")]
    MissingReference(u32),

    #[error("grid {rows}x{cols} cannot hold {channels} channels")]
    GridTooSmall {
        rows: usize,
        cols: usize,
        channels: u32,
    },

    #[error("image is {found_h}x{found_w}, layout requires {expected_h}x{expected_w}")]
    ImageDimMismatch {
        expected_h: usize,
        expected_w: usize,
        found_h: usize,
        found_w: usize,
    },

    #[error("nothing counted: no frames remain after exclusion")]
    NothingCounted,

    #[error("non-positive loss: ap_after {after} >= ap_before {before}")]
    NonPositiveLoss { before: f64, after: f64 },

    #[error("header rejected by receiver: {0}")]
    HeaderRejected(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("session aborted: {0}")]
    SessionAborted(String),
}

impl CodecError {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        CodecError::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
