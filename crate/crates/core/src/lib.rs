//! Differential codec for temporal sequences of neural-network feature maps.
//!
//! A split-computing deployment runs the first layers of a network on an edge
//! device and ships the intermediate feature maps to the cloud. For a fixed
//! camera the maps of adjacent frames are nearly identical, so this crate
//! codes them the way DPCM codes audio: clip, subtract the previous
//! *reconstructed* frame, quantize the residual uniformly, and run-length
//! code the result, with periodic key frames so a stream can be joined.
//!
//! The pieces:
//!
//! - [`tensor`]: the feature-map data model, the `.fmap` tensor container,
//!   and a deterministic synthetic sequence generator.
//! - [`quant`]: clipping, residual formation, and the uniform key/residual
//!   quantizers.
//! - [`rle`]: the dominant-symbol run-length coder.
//! - [`container`]: the `.ifmd` bitstream (stream header, CRC-protected
//!   frame packets).
//! - [`pipeline`]: the closed-loop encoder/decoder state machines with the
//!   GOP key-frame policy.
//! - [`rearrange`]: tiling/quilting a map into one grayscale image plus PGM
//!   export, for feeding external video encoders.
//! - [`metrics`]: compression ratio, bits per pixel, AP-loss bookkeeping,
//!   and the CSV benchmark report.
//! - [`stream`]: edge-to-cloud transport of a live packet stream over TCP.

pub mod container;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod quant;
pub mod rearrange;
pub mod rle;
pub mod stream;
pub mod tensor;

pub use container::{FramePacket, StreamHeader};
pub use error::{CodecError, Result};
pub use pipeline::{CodecConfig, Decoder, Encoder};
pub use quant::{ClipRange, FrameKind, QuantSpec, SymbolMap};
pub use tensor::{FeatureMap, FeatureSequence, Shape, SyntheticSpec};
