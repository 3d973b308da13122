//! Per-element codec math: clipping, residual formation, and the uniform
//! quantizers for residual and key frames.
//!
//! Both quantizers share one byte-sized symbol alphabet `{0..k-1}`:
//!
//! - residual path maps `[-A, A]` via `round((v + A) / 2A * (k-1))`,
//! - key path maps `[clip_min, clip_max]` via
//!   `round((v - clip_min) / A * (k-1))`,
//!
//! where `A = clip_max - clip_min` and rounding is half-away-from-zero.
//! Scalar arithmetic is evaluated in f64 so every implementation of these
//! formulas produces identical symbol streams.

use crate::error::{CodecError, Result};
use crate::tensor::{FeatureMap, Shape};

/// The clipping interval applied ahead of quantization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipRange {
    min: f32,
    max: f32,
}

impl ClipRange {
    pub fn new(min: f32, max: f32) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() || min >= max {
            return Err(CodecError::invalid(
                "clip range",
                format!("need finite min < max, got [{min}, {max}]"),
            ));
        }
        Ok(ClipRange { min, max })
    }

    pub fn min(&self) -> f32 {
        self.min
    }

    pub fn max(&self) -> f32 {
        self.max
    }

    /// The clip range A = max - min.
    pub fn span(&self) -> f32 {
        self.max - self.min
    }

    pub fn clamp(&self, v: f32) -> f32 {
        v.clamp(self.min, self.max)
    }
}

/// Clip interval plus quantization level count `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantSpec {
    clip: ClipRange,
    k: u16,
}

/// `k` is capped so one symbol always fits one byte.
pub const MIN_K: u16 = 2;
pub const MAX_K: u16 = 256;

impl QuantSpec {
    pub fn new(clip: ClipRange, k: u16) -> Result<Self> {
        if !(MIN_K..=MAX_K).contains(&k) {
            return Err(CodecError::invalid(
                "quantization level",
                format!("k must be in {MIN_K}..={MAX_K}, got {k}"),
            ));
        }
        Ok(QuantSpec { clip, k })
    }

    pub fn clip(&self) -> ClipRange {
        self.clip
    }

    pub fn k(&self) -> u16 {
        self.k
    }

    /// Worst-case residual-path reconstruction error, A/(k-1).
    pub fn residual_error_bound(&self) -> f32 {
        self.clip.span() / (self.k - 1) as f32
    }

    /// Worst-case key-path reconstruction error, A/(2(k-1)).
    pub fn key_error_bound(&self) -> f32 {
        self.clip.span() / (2.0 * (self.k - 1) as f32)
    }
}

/// Whether a frame is coded standalone or against the previous reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameKind {
    Key,
    Residual,
}

impl FrameKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FrameKind::Key => "key",
            FrameKind::Residual => "residual",
        }
    }
}

impl std::fmt::Display for FrameKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A quantized frame: one byte symbol per tensor element.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMap {
    shape: Shape,
    kind: FrameKind,
    symbols: Vec<u8>,
}

impl SymbolMap {
    pub fn new(shape: Shape, kind: FrameKind, symbols: Vec<u8>) -> Result<Self> {
        if symbols.len() != shape.element_count() {
            return Err(CodecError::LengthMismatch {
                context: "symbol map",
                expected: shape.element_count() as u64,
                found: symbols.len() as u64,
            });
        }
        Ok(SymbolMap {
            shape,
            kind,
            symbols,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }
}

/// Clamps every element into the clip interval; in-range values pass through.
pub fn clip_map(map: &FeatureMap, range: ClipRange) -> FeatureMap {
    let data = map.data().iter().map(|&v| range.clamp(v)).collect();
    FeatureMap::from_raw(map.shape(), map.frame_index(), data)
}

/// Element-wise `current - prev_recon`. Both inputs must already be clipped,
/// which bounds the result to `[-A, A]`.
pub fn residual_map(current_clipped: &FeatureMap, prev_recon: &FeatureMap) -> Result<FeatureMap> {
    if current_clipped.shape() != prev_recon.shape() {
        return Err(CodecError::ShapeMismatch {
            expected: current_clipped.shape(),
            found: prev_recon.shape(),
        });
    }
    let data = current_clipped
        .data()
        .iter()
        .zip(prev_recon.data())
        .map(|(c, p)| c - p)
        .collect();
    Ok(FeatureMap::from_raw(
        current_clipped.shape(),
        current_clipped.frame_index(),
        data,
    ))
}

#[inline]
fn quantize_residual_value(v: f32, a: f64, k: u16) -> u8 {
    let t = (v as f64 + a) / (2.0 * a) * (k - 1) as f64;
    t.round() as u8
}

#[inline]
fn dequantize_residual_value(sym: u8, a: f64, k: u16) -> f32 {
    (sym as f64 * 2.0 * a / (k - 1) as f64 - a) as f32
}

#[inline]
fn quantize_key_value(v: f32, min: f64, a: f64, k: u16) -> u8 {
    let t = (v as f64 - min) / a * (k - 1) as f64;
    t.round() as u8
}

#[inline]
fn dequantize_key_value(sym: u8, min: f64, a: f64, k: u16) -> f32 {
    (min + sym as f64 * a / (k - 1) as f64) as f32
}

/// Maps a residual in `[-A, A]` onto `{0..k-1}`; zero residual lands on the
/// central symbol `round((k-1)/2)`.
pub fn quantize_residual(res: &FeatureMap, spec: &QuantSpec) -> Result<SymbolMap> {
    let a = spec.clip.span();
    check_range(res, -a, a)?;
    let symbols = res
        .data()
        .iter()
        .map(|&v| quantize_residual_value(v, a as f64, spec.k))
        .collect();
    SymbolMap::new(res.shape(), FrameKind::Residual, symbols)
}

/// Inverse of [`quantize_residual`]: `sym * 2A/(k-1) - A`.
pub fn dequantize_residual(sym: &SymbolMap, spec: &QuantSpec) -> Result<FeatureMap> {
    expect_kind(sym, FrameKind::Residual)?;
    check_symbols(sym, spec)?;
    let a = spec.clip.span() as f64;
    let data = sym
        .symbols()
        .iter()
        .map(|&s| dequantize_residual_value(s, a, spec.k))
        .collect();
    Ok(FeatureMap::from_raw(sym.shape(), 0, data))
}

/// Maps a clipped frame in `[clip_min, clip_max]` onto `{0..k-1}`.
pub fn quantize_key(map: &FeatureMap, spec: &QuantSpec) -> Result<SymbolMap> {
    check_range(map, spec.clip.min(), spec.clip.max())?;
    let (min, a) = (spec.clip.min() as f64, spec.clip.span() as f64);
    let symbols = map
        .data()
        .iter()
        .map(|&v| quantize_key_value(v, min, a, spec.k))
        .collect();
    SymbolMap::new(map.shape(), FrameKind::Key, symbols)
}

/// Inverse of [`quantize_key`]: `clip_min + sym * A/(k-1)`.
pub fn dequantize_key(sym: &SymbolMap, spec: &QuantSpec) -> Result<FeatureMap> {
    expect_kind(sym, FrameKind::Key)?;
    check_symbols(sym, spec)?;
    let (min, a) = (spec.clip.min() as f64, spec.clip.span() as f64);
    let data = sym
        .symbols()
        .iter()
        .map(|&s| dequantize_key_value(s, min, a, spec.k))
        .collect();
    Ok(FeatureMap::from_raw(sym.shape(), 0, data))
}

fn check_range(map: &FeatureMap, lo: f32, hi: f32) -> Result<()> {
    for (index, &value) in map.data().iter().enumerate() {
        if value < lo || value > hi {
            return Err(CodecError::ValueOutOfRange {
                value,
                index,
                lo,
                hi,
            });
        }
    }
    Ok(())
}

fn check_symbols(sym: &SymbolMap, spec: &QuantSpec) -> Result<()> {
    for &s in sym.symbols() {
        if s as u16 >= spec.k {
            return Err(CodecError::SymbolOutOfRange {
                symbol: s,
                k: spec.k,
            });
        }
    }
    Ok(())
}

fn expect_kind(sym: &SymbolMap, kind: FrameKind) -> Result<()> {
    if sym.kind() != kind {
        return Err(CodecError::invalid(
            "symbol map",
            format!("expected {kind} kind, got {}", sym.kind()),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Shape;

    fn range06() -> ClipRange {
        ClipRange::new(0.0, 6.0).unwrap()
    }

    fn spec_k7() -> QuantSpec {
        QuantSpec::new(range06(), 7).unwrap()
    }

    fn map_of(values: Vec<f32>) -> FeatureMap {
        let shape = Shape::new(1, 1, values.len() as u32).unwrap();
        FeatureMap::new(shape, 0, values).unwrap()
    }

    #[test]
    fn clip_range_rejects_inverted_bounds() {
        assert!(ClipRange::new(6.0, 0.0).is_err());
        assert!(ClipRange::new(1.0, 1.0).is_err());
        assert!(ClipRange::new(0.0, f32::INFINITY).is_err());
    }

    #[test]
    fn quant_spec_bounds_k() {
        assert!(QuantSpec::new(range06(), 1).is_err());
        assert!(QuantSpec::new(range06(), 257).is_err());
        assert!(QuantSpec::new(range06(), 2).is_ok());
        assert!(QuantSpec::new(range06(), 256).is_ok());
    }

    #[test]
    fn clip_pins_and_passes() {
        let out = clip_map(&map_of(vec![7.2, -0.5, 3.1]), range06());
        assert_eq!(out.data(), &[6.0, 0.0, 3.1]);
    }

    #[test]
    fn clip_is_idempotent() {
        let input = map_of(vec![-3.0, 0.0, 2.7, 5.9999, 6.0, 123.0]);
        let once = clip_map(&input, range06());
        let twice = clip_map(&once, range06());
        assert_eq!(once.data(), twice.data());
    }

    #[test]
    fn residual_of_equal_frames_is_zero() {
        let a = map_of(vec![1.0, 2.0, 3.0]);
        let res = residual_map(&a, &a).unwrap();
        assert!(res.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn residual_hits_range_boundary() {
        let hi = map_of(vec![6.0; 4]);
        let lo = map_of(vec![0.0; 4]);
        assert!(residual_map(&hi, &lo).unwrap().data().iter().all(|&v| v == 6.0));
    }

    #[test]
    fn residual_direct_subtraction() {
        let cur = map_of(vec![1.5]);
        let prev = map_of(vec![2.0]);
        assert_eq!(residual_map(&cur, &prev).unwrap().data(), &[-0.5]);
    }

    #[test]
    fn residual_rejects_shape_mismatch() {
        let a = map_of(vec![0.0; 3]);
        let b = map_of(vec![0.0; 4]);
        assert!(matches!(
            residual_map(&a, &b).unwrap_err(),
            CodecError::ShapeMismatch { .. }
        ));
    }

    #[test]
    fn residual_quantizer_examples() {
        // A = 6, k = 7: (v + 6)/12 * 6 then round.
        let spec = spec_k7();
        let sym = quantize_residual(&map_of(vec![0.0, -6.0, 6.0, 2.0]), &spec).unwrap();
        assert_eq!(sym.symbols(), &[3, 0, 6, 4]);
    }

    #[test]
    fn residual_dequantizer_examples() {
        let spec = spec_k7();
        let shape = Shape::new(1, 1, 3).unwrap();
        let sym = SymbolMap::new(shape, FrameKind::Residual, vec![3, 0, 4]).unwrap();
        assert_eq!(dequantize_residual(&sym, &spec).unwrap().data(), &[0.0, -6.0, 2.0]);
    }

    #[test]
    fn residual_quantizer_rejects_out_of_range() {
        let err = quantize_residual(&map_of(vec![6.5]), &spec_k7()).unwrap_err();
        assert!(matches!(err, CodecError::ValueOutOfRange { .. }));
    }

    #[test]
    fn dequantize_rejects_symbol_at_k() {
        let shape = Shape::new(1, 1, 1).unwrap();
        let sym = SymbolMap::new(shape, FrameKind::Residual, vec![7]).unwrap();
        assert!(matches!(
            dequantize_residual(&sym, &spec_k7()).unwrap_err(),
            CodecError::SymbolOutOfRange { symbol: 7, k: 7 }
        ));
    }

    #[test]
    fn dequantize_rejects_kind_mismatch() {
        let shape = Shape::new(1, 1, 1).unwrap();
        let sym = SymbolMap::new(shape, FrameKind::Key, vec![0]).unwrap();
        assert!(dequantize_residual(&sym, &spec_k7()).is_err());
    }

    #[test]
    fn key_quantizer_examples() {
        let spec = spec_k7();
        let sym = quantize_key(&map_of(vec![0.0, 6.0, 3.0, 3.4]), &spec).unwrap();
        assert_eq!(sym.symbols(), &[0, 6, 3, 3]);
        let back = dequantize_key(&sym, &spec).unwrap();
        assert_eq!(back.data(), &[0.0, 6.0, 3.0, 3.0]);
        // 3.4 reconstructs to 3.0: error 0.4 <= A/(2(k-1)) = 0.5.
        assert!((back.data()[3] - 3.4f32).abs() <= spec.key_error_bound());
    }

    #[test]
    fn residual_roundtrip_error_within_half_step() {
        let spec = spec_k7();
        let bound = spec.residual_error_bound();
        let values: Vec<f32> = (0..=1200).map(|i| -6.0 + i as f32 * 0.01).collect();
        let map = map_of(values.clone());
        let sym = quantize_residual(&map, &spec).unwrap();
        let back = dequantize_residual(&sym, &spec).unwrap();
        for (v, r) in values.iter().zip(back.data()) {
            assert!((v - r).abs() <= bound, "residual {v} -> {r} violates {bound}");
        }
    }

    #[test]
    fn key_roundtrip_error_within_half_step() {
        let spec = spec_k7();
        let bound = spec.key_error_bound();
        let values: Vec<f32> = (0..=600).map(|i| i as f32 * 0.01).collect();
        let map = map_of(values.clone());
        let back = dequantize_key(&quantize_key(&map, &spec).unwrap(), &spec).unwrap();
        for (v, r) in values.iter().zip(back.data()) {
            assert!((v - r).abs() <= bound, "key {v} -> {r} violates {bound}");
        }
    }

    #[test]
    fn zero_residual_concentrates_on_central_symbol() {
        for k in [2u16, 3, 7, 8, 17, 256] {
            let spec = QuantSpec::new(range06(), k).unwrap();
            let sym = quantize_residual(&map_of(vec![0.0; 64]), &spec).unwrap();
            let central = (((k - 1) as f64) / 2.0).round() as u8;
            assert!(
                sym.symbols().iter().all(|&s| s == central),
                "k={k}: expected point mass at {central}"
            );
        }
    }

    #[test]
    fn quantizers_are_monotone() {
        let spec = spec_k7();
        let res_values: Vec<f32> = (0..=240).map(|i| -6.0 + i as f32 * 0.05).collect();
        let sym = quantize_residual(&map_of(res_values), &spec).unwrap();
        assert!(sym.symbols().windows(2).all(|w| w[0] <= w[1]));
        let key_values: Vec<f32> = (0..=120).map(|i| i as f32 * 0.05).collect();
        let sym = quantize_key(&map_of(key_values), &spec).unwrap();
        assert!(sym.symbols().windows(2).all(|w| w[0] <= w[1]));
    }
}
