//! Feature-map data model, the `.fmap` tensor container, and a synthetic
//! sequence generator for desk-scale testing.
//!
//! # `.fmap` container layout
//!
//! Little-endian throughout, bit-exact:
//!
//! | field   | size | value                          |
//! |---------|------|--------------------------------|
//! | magic   | 4    | `"FMAP"`                       |
//! | version | 1    | `1`                            |
//! | dtype   | 1    | `1` (IEEE-754 f32)             |
//! | C       | 4    | channels, u32                  |
//! | H       | 4    | height, u32                    |
//! | W       | 4    | width, u32                     |
//! | F       | 4    | frame count, u32, must be >= 1 |
//! | payload | 4·C·H·W·F | f32 values, frame-major  |
//!
//! Within a frame the element at flat index `p = c·H·W + y·W + x` is channel
//! `c`, row `y`, column `x` (channel-major, then row-major), so the residual
//! and quantizer loops are a single pass over `data`.
//!
//! # Synthetic generator
//!
//! [`generate_synthetic`] is a pure function of its [`SyntheticSpec`]. All
//! randomness comes from a counter-based generator: sample `i` of stream
//! `(seed, tag)` is `finalize(finalize(seed ^ finalize(tag)) + i·GOLDEN)`
//! where `finalize` is the SplitMix64 output scrambler and `GOLDEN` is
//! 0x9E3779B97F4A7C15. Every value is therefore a pure function of the spec,
//! with no sequential state.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use crate::error::{CodecError, Result};

pub const FMAP_MAGIC: [u8; 4] = *b"FMAP";
pub const FMAP_VERSION: u8 = 1;
pub const FMAP_DTYPE_F32: u8 = 1;
/// Serialized header size in bytes: magic, version, dtype, C, H, W, F.
pub const FMAP_HEADER_LEN: u64 = 4 + 1 + 1 + 4 * 4;

/// Dimensions of one feature map: C channels of H×W planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub channels: u32,
    pub height: u32,
    pub width: u32,
}

impl Shape {
    pub fn new(channels: u32, height: u32, width: u32) -> Result<Self> {
        let shape = Shape {
            channels,
            height,
            width,
        };
        if channels == 0 || height == 0 || width == 0 {
            return Err(CodecError::invalid(
                "shape",
                format!("dimensions must be positive, got {shape}"),
            ));
        }
        // Reject products that cannot be addressed in memory.
        let product = (channels as u64)
            .checked_mul(height as u64)
            .and_then(|p| p.checked_mul(width as u64))
            .filter(|&p| p <= (isize::MAX as u64) / 4);
        if product.is_none() {
            return Err(CodecError::invalid(
                "shape",
                format!("element count of {shape} overflows"),
            ));
        }
        Ok(shape)
    }

    /// C·H·W.
    pub fn element_count(&self) -> usize {
        self.channels as usize * self.height as usize * self.width as usize
    }

    /// H·W, the elements of one channel plane.
    pub fn plane_elements(&self) -> usize {
        self.height as usize * self.width as usize
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.channels, self.height, self.width)
    }
}

/// One frame's C×H×W tensor of finite f32 values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    shape: Shape,
    frame_index: u32,
    data: Vec<f32>,
}

impl FeatureMap {
    /// Validates length and finiteness. Use for ingested data; internal
    /// transforms that preserve finiteness go through [`FeatureMap::from_raw`].
    pub fn new(shape: Shape, frame_index: u32, data: Vec<f32>) -> Result<Self> {
        if data.len() != shape.element_count() {
            return Err(CodecError::LengthMismatch {
                context: "feature map data",
                expected: shape.element_count() as u64,
                found: data.len() as u64,
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(CodecError::NonFinite {
                frame: frame_index,
                index,
            });
        }
        Ok(FeatureMap {
            shape,
            frame_index,
            data,
        })
    }

    /// Constructor for values that are finite by construction.
    pub(crate) fn from_raw(shape: Shape, frame_index: u32, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), shape.element_count());
        FeatureMap {
            shape,
            frame_index,
            data,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn frame_index(&self) -> u32 {
        self.frame_index
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }
}

/// An ordered run of frames sharing one shape, indexed 0..F-1.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    shape: Shape,
    frames: Vec<FeatureMap>,
}

impl FeatureSequence {
    pub fn new(frames: Vec<FeatureMap>) -> Result<Self> {
        let first = frames.first().ok_or(CodecError::EmptySequence)?;
        let shape = first.shape();
        for (i, frame) in frames.iter().enumerate() {
            if frame.shape() != shape {
                return Err(CodecError::ShapeMismatch {
                    expected: shape,
                    found: frame.shape(),
                });
            }
            if frame.frame_index() != i as u32 {
                return Err(CodecError::FrameIndexGap {
                    expected: i as u32,
                    found: frame.frame_index(),
                });
            }
        }
        Ok(FeatureSequence { shape, frames })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frames(&self) -> &[FeatureMap] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<FeatureMap> {
        self.frames
    }
}

/// Parameters of the synthetic fixed-camera sequence generator.
///
/// Frames are a static pseudo-random background plus a Gaussian blob whose
/// center translates diagonally by `blob_speed` pixels per frame (toroidal
/// wrap), plus i.i.d. uniform noise of half-width `noise_scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub shape: Shape,
    pub frame_count: u32,
    pub seed: u64,
    pub blob_speed: f64,
    pub background_scale: f64,
    pub noise_scale: f64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.frame_count == 0 {
            return Err(CodecError::invalid("synthetic spec", "frame_count must be >= 1"));
        }
        if !self.noise_scale.is_finite() || self.noise_scale < 0.0 {
            return Err(CodecError::invalid(
                "synthetic spec",
                format!("noise_scale must be finite and >= 0, got {}", self.noise_scale),
            ));
        }
        for (name, v) in [
            ("blob_speed", self.blob_speed),
            ("background_scale", self.background_scale),
        ] {
            if !v.is_finite() {
                return Err(CodecError::invalid(
                    "synthetic spec",
                    format!("{name} must be finite, got {v}"),
                ));
            }
        }
        Ok(())
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const TAG_BACKGROUND: u64 = 1;
const TAG_AMPLITUDE: u64 = 2;
const TAG_NOISE: u64 = 3;

/// SplitMix64 output scrambler.
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sample `index` of the counter-based stream `(seed, tag)`, in [0, 1).
fn unit_sample(seed: u64, tag: u64, index: u64) -> f64 {
    let base = finalize(seed ^ finalize(tag));
    let bits = finalize(base.wrapping_add(index.wrapping_mul(GOLDEN)));
    (bits >> 11) as f64 / (1u64 << 53) as f64
}

/// Signed distance from `a` to `b` on a circle of circumference `n`,
/// in [-n/2, n/2).
fn toroidal_delta(a: f64, b: f64, n: f64) -> f64 {
    let d = (a - b).rem_euclid(n);
    if d >= n / 2.0 {
        d - n
    } else {
        d
    }
}

/// Deterministic fixed-camera fixture: static background, slow-moving blob,
/// optional noise. Pure function of `spec`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<FeatureSequence> {
    spec.validate()?;
    let shape = spec.shape;
    let (c, h, w) = (
        shape.channels as usize,
        shape.height as usize,
        shape.width as usize,
    );
    let plane = h * w;
    let elements = shape.element_count();

    let background: Vec<f64> = (0..elements)
        .map(|i| spec.background_scale * unit_sample(spec.seed, TAG_BACKGROUND, i as u64))
        .collect();
    // Per-channel blob amplitude in [1, 3].
    let amplitude: Vec<f64> = (0..c)
        .map(|ch| 1.0 + 2.0 * unit_sample(spec.seed, TAG_AMPLITUDE, ch as u64))
        .collect();

    let sigma = (h.min(w) as f64 / 8.0).max(1.0);
    let inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);

    let mut frames = Vec::with_capacity(spec.frame_count as usize);
    let mut blob_plane = vec![0.0f64; plane];
    for t in 0..spec.frame_count {
        let cx = w as f64 / 2.0 + spec.blob_speed * t as f64;
        let cy = h as f64 / 2.0 + spec.blob_speed * t as f64;
        for y in 0..h {
            let dy = toroidal_delta(y as f64, cy, h as f64);
            for x in 0..w {
                let dx = toroidal_delta(x as f64, cx, w as f64);
                blob_plane[y * w + x] = (-(dx * dx + dy * dy) * inv_two_sigma_sq).exp();
            }
        }

        let mut data = Vec::with_capacity(elements);
        for ch in 0..c {
            let amp = amplitude[ch];
            let base = ch * plane;
            for p in 0..plane {
                let mut v = background[base + p] + amp * blob_plane[p];
                if spec.noise_scale > 0.0 {
                    let idx = (t as u64 * elements as u64) + (base + p) as u64;
                    v += spec.noise_scale * (2.0 * unit_sample(spec.seed, TAG_NOISE, idx) - 1.0);
                }
                data.push(v as f32);
            }
        }
        frames.push(FeatureMap::from_raw(shape, t, data));
    }
    FeatureSequence::new(frames)
}

/// Writes `seq` to `path` in the `.fmap` container. Returns bytes written.
pub fn save_sequence(seq: &FeatureSequence, path: impl AsRef<Path>) -> Result<u64> {
    let mut w = BufWriter::new(File::create(path)?);
    let shape = seq.shape();
    w.write_all(&FMAP_MAGIC)?;
    w.write_all(&[FMAP_VERSION, FMAP_DTYPE_F32])?;
    for dim in [
        shape.channels,
        shape.height,
        shape.width,
        seq.frame_count() as u32,
    ] {
        w.write_all(&dim.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(shape.element_count() * 4);
    for frame in seq.frames() {
        buf.clear();
        for v in frame.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(FMAP_HEADER_LEN + 4 * seq.frame_count() as u64 * shape.element_count() as u64)
}

/// Reads a `.fmap` container back into a sequence, byte-exactly.
pub fn load_sequence(path: impl AsRef<Path>) -> Result<FeatureSequence> {
    let mut r = BufReader::new(File::open(path)?);

    let mut head = [0u8; FMAP_HEADER_LEN as usize];
    r.read_exact(&mut head)
        .map_err(|e| map_eof(e, "fmap header"))?;
    if head[0..4] != FMAP_MAGIC {
        return Err(CodecError::BadMagic { expected: "FMAP" });
    }
    if head[4] != FMAP_VERSION {
        return Err(CodecError::UnsupportedVersion {
            found: head[4],
            expected: FMAP_VERSION,
        });
    }
    if head[5] != FMAP_DTYPE_F32 {
        return Err(CodecError::UnsupportedDtype(head[5]));
    }
    let dim = |i: usize| u32::from_le_bytes(head[6 + 4 * i..10 + 4 * i].try_into().unwrap());
    let shape = Shape::new(dim(0), dim(1), dim(2))?;
    let frame_count = dim(3);
    if frame_count == 0 {
        return Err(CodecError::EmptySequence);
    }

    let elements = shape.element_count();
    let mut frames = Vec::with_capacity(frame_count as usize);
    let mut buf = vec![0u8; elements * 4];
    for t in 0..frame_count {
        r.read_exact(&mut buf)
            .map_err(|e| map_eof(e, "fmap payload"))?;
        let data: Vec<f32> = buf
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        frames.push(FeatureMap::new(shape, t, data)?);
    }
    // The header fully determines the payload length; anything further is
    // a corrupt container.
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => FeatureSequence::new(frames),
        _ => Err(CodecError::LengthMismatch {
            context: "fmap payload",
            expected: 4 * frame_count as u64 * elements as u64,
            found: 4 * frame_count as u64 * elements as u64 + 1,
        }),
    }
}

fn map_eof(e: std::io::Error, context: &'static str) -> CodecError {
    if e.kind() == ErrorKind::UnexpectedEof {
        CodecError::Truncated(context)
    } else {
        CodecError::Io(e)
    }
}
