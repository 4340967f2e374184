//! Dense row-major frame types and the sequence container shared by every stage.
//!
//! All frames are immutable once built. Constructors check that the data length
//! matches `height * width` (times the channel count for RGB) and that values lie in
//! the domain of the frame type.

use std::fmt;

use crate::error::{Error, Result};

/// Common shape accessors for every frame type.
pub trait Frame {
    fn height(&self) -> usize;
    fn width(&self) -> usize;

    /// Time step carried by the frame itself, if the type records one.
    fn frame_index(&self) -> Option<u32> {
        None
    }

    fn shape(&self) -> (usize, usize) {
        (self.height(), self.width())
    }
}

/// Frames whose pixels are either active or silent (DVS events, OMS spikes).
pub trait ActivityFrame: Frame {
    fn is_active(&self, index: usize) -> bool;

    fn active_count(&self) -> usize {
        (0..self.height() * self.width()).filter(|&i| self.is_active(i)).count()
    }
}

fn check_dims(height: usize, width: usize, len: usize, per_pixel: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::invalid(format!(
            "frame dimensions must be positive, got {height}x{width}"
        )));
    }
    let expected = height
        .checked_mul(width)
        .and_then(|n| n.checked_mul(per_pixel))
        .ok_or_else(|| Error::invalid("frame dimensions overflow"))?;
    if len != expected {
        return Err(Error::invalid(format!(
            "data length {len} does not match {height}x{width}x{per_pixel} = {expected}"
        )));
    }
    Ok(())
}

/// 8-bit, three-channel interleaved image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbFrame {
    height: usize,
    width: usize,
    data: Vec<u8>,
}

impl RgbFrame {
    pub const CHANNELS: usize = 3;

    pub fn new(height: usize, width: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if channels != Self::CHANNELS {
            return Err(Error::invalid(format!(
                "RGB frames need exactly 3 channels, got {channels}"
            )));
        }
        check_dims(height, width, data.len(), Self::CHANNELS)?;
        Ok(Self { height, width, data })
    }

    pub fn filled(height: usize, width: usize, rgb: [u8; 3]) -> Result<Self> {
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(height.saturating_mul(width).saturating_mul(3))
            .collect();
        Self::new(height, width, 3, data)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        let i = (row * self.width + col) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

impl Frame for RgbFrame {
    fn height(&self) -> usize {
        self.height
    }
    fn width(&self) -> usize {
        self.width
    }
}

/// Unconstrained real-valued plane: log intensities, filter responses.
#[derive(Clone, Debug, PartialEq)]
pub struct RealFrame {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl RealFrame {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(height, width, data.len(), 1)?;
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at index {bad}")));
        }
        Ok(Self { height, width, data })
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height.saturating_mul(width)])
    }

    pub(crate) fn from_parts(height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        Self { height, width, data }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }
}

impl Frame for RealFrame {
    fn height(&self) -> usize {
        self.height
    }
    fn width(&self) -> usize {
        self.width
    }
}

/// Normalized luminance in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LuminanceFrame {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl LuminanceFrame {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(height, width, data.len(), 1)?;
        if let Some(bad) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid(format!(
                "luminance {} at index {bad} is outside [0, 1]",
                data[bad]
            )));
        }
        Ok(Self { height, width, data })
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height.saturating_mul(width)])
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }
}

impl Frame for LuminanceFrame {
    fn height(&self) -> usize {
        self.height
    }
    fn width(&self) -> usize {
        self.width
    }
}

/// Ternary DVS event frame: each pixel is -1, 0 or +1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventFrame {
    height: usize,
    width: usize,
    data: Vec<i8>,
    frame_index: u32,
}

impl EventFrame {
    pub fn new(height: usize, width: usize, data: Vec<i8>, frame_index: u32) -> Result<Self> {
        check_dims(height, width, data.len(), 1)?;
        if let Some(bad) = data.iter().position(|v| !(-1..=1).contains(v)) {
            return Err(Error::invalid(format!(
                "event polarity {} at index {bad} is not -1, 0 or +1",
                data[bad]
            )));
        }
        Ok(Self {
            height,
            width,
            data,
            frame_index,
        })
    }

    pub fn zeros(height: usize, width: usize, frame_index: u32) -> Result<Self> {
        Self::new(height, width, vec![0; height.saturating_mul(width)], frame_index)
    }

    pub fn data(&self) -> &[i8] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.data[row * self.width + col]
    }

    pub fn with_index(mut self, frame_index: u32) -> Self {
        self.frame_index = frame_index;
        self
    }
}

impl Frame for EventFrame {
    fn height(&self) -> usize {
        self.height
    }
    fn width(&self) -> usize {
        self.width
    }
    fn frame_index(&self) -> Option<u32> {
        Some(self.frame_index)
    }
}

impl ActivityFrame for EventFrame {
    fn is_active(&self, index: usize) -> bool {
        self.data[index] != 0
    }
    fn active_count(&self) -> usize {
        self.data.iter().filter(|&&p| p != 0).count()
    }
}

/// Boolean OMS spike frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpikeFrame {
    height: usize,
    width: usize,
    data: Vec<bool>,
    frame_index: u32,
}

impl SpikeFrame {
    pub fn new(height: usize, width: usize, data: Vec<bool>, frame_index: u32) -> Result<Self> {
        check_dims(height, width, data.len(), 1)?;
        Ok(Self {
            height,
            width,
            data,
            frame_index,
        })
    }

    pub fn empty(height: usize, width: usize, frame_index: u32) -> Result<Self> {
        Self::new(height, width, vec![false; height.saturating_mul(width)], frame_index)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.width + col]
    }
}

impl Frame for SpikeFrame {
    fn height(&self) -> usize {
        self.height
    }
    fn width(&self) -> usize {
        self.width
    }
    fn frame_index(&self) -> Option<u32> {
        Some(self.frame_index)
    }
}

impl ActivityFrame for SpikeFrame {
    fn is_active(&self, index: usize) -> bool {
        self.data[index]
    }
    fn active_count(&self) -> usize {
        self.data.iter().filter(|&&s| s).count()
    }
}

/// One problem found by [`validate_frames`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Empty,
    ShapeMismatch {
        position: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    IndexGap {
        position: usize,
        expected: u32,
        found: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "sequence is empty"),
            Violation::ShapeMismatch {
                position,
                expected,
                found,
            } => write!(
                f,
                "frame {position} is {}x{}, expected {}x{}",
                found.0, found.1, expected.0, expected.1
            ),
            Violation::IndexGap {
                position,
                expected,
                found,
            } => write!(f, "frame {position} carries index {found}, expected {expected}"),
        }
    }
}

/// Report every way `frames` fails to form a valid sequence. Empty iff valid.
pub fn validate_frames<F: Frame>(frames: &[F]) -> Vec<Violation> {
    let Some(first) = frames.first() else {
        return vec![Violation::Empty];
    };
    let expected = first.shape();
    let mut out = Vec::new();
    for (position, frame) in frames.iter().enumerate() {
        if frame.shape() != expected {
            out.push(Violation::ShapeMismatch {
                position,
                expected,
                found: frame.shape(),
            });
        }
        if let Some(found) = frame.frame_index() {
            let want = position as u32;
            if found != want {
                out.push(Violation::IndexGap {
                    position,
                    expected: want,
                    found,
                });
            }
        }
    }
    out
}

/// Ordered, same-shape frames sampled at a fixed rate.
///
/// Construction rejects shape mismatches and index gaps; an empty sequence is
/// representable so that downstream stages can report it themselves.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSequence<F> {
    frames: Vec<F>,
    frame_rate: f64,
}

impl<F: Frame> FrameSequence<F> {
    pub fn new(frames: Vec<F>, frame_rate: f64) -> Result<Self> {
        if !(frame_rate.is_finite() && frame_rate > 0.0) {
            return Err(Error::invalid(format!("frame rate must be positive, got {frame_rate}")));
        }
        let problems: Vec<String> = validate_frames(&frames)
            .into_iter()
            .filter(|v| *v != Violation::Empty)
            .map(|v| v.to_string())
            .collect();
        if !problems.is_empty() {
            return Err(Error::invalid(problems.join("; ")));
        }
        Ok(Self { frames, frame_rate })
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_frames(&self.frames)
    }

    pub fn frames(&self) -> &[F] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<F> {
        self.frames
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// `(height, width)` of the frames, `None` when empty.
    pub fn shape(&self) -> Option<(usize, usize)> {
        self.frames.first().map(Frame::shape)
    }

    /// Wall-clock time of frame `index` in seconds.
    pub fn timestamp(&self, index: usize) -> f64 {
        index as f64 / self.frame_rate
    }

    pub(crate) fn require_nonempty(&self, what: &str) -> Result<(usize, usize)> {
        self.shape()
            .ok_or_else(|| Error::invalid(format!("{what}: sequence is empty")))
    }
}

impl<F: ActivityFrame> FrameSequence<F> {
    pub fn total_active(&self) -> usize {
        self.frames.iter().map(ActivityFrame::active_count).sum()
    }
}

/// Luma-weighted grayscale: `(0.299 R + 0.587 G + 0.114 B) / 255`.
pub fn rgb_to_luminance(frame: &RgbFrame) -> LuminanceFrame {
    let data = frame
        .data
        .chunks_exact(3)
        .map(|px| {
            let y = (0.299 * f64::from(px[0]) + 0.587 * f64::from(px[1]) + 0.114 * f64::from(px[2])) / 255.0;
            // the weights sum to 1 only up to rounding
            y.clamp(0.0, 1.0)
        })
        .collect();
    LuminanceFrame {
        height: frame.height,
        width: frame.width,
        data,
    }
}

pub fn luminance_sequence(seq: &FrameSequence<RgbFrame>) -> FrameSequence<LuminanceFrame> {
    FrameSequence {
        frames: seq.frames.iter().map(rgb_to_luminance).collect(),
        frame_rate: seq.frame_rate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn black_and_white_map_to_the_ends() {
        let black = rgb_to_luminance(&RgbFrame::filled(2, 3, [0, 0, 0]).unwrap());
        assert!(black.data().iter().all(|&v| v == 0.0));
        let white = rgb_to_luminance(&RgbFrame::filled(2, 3, [255, 255, 255]).unwrap());
        for &v in white.data() {
            assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn pure_red_is_its_weight() {
        let red = rgb_to_luminance(&RgbFrame::filled(1, 1, [255, 0, 0]).unwrap());
        assert!((red.data()[0] - 0.299).abs() < 1e-12);
    }

    #[test]
    fn rgb_rejects_wrong_channel_count() {
        let err = RgbFrame::new(2, 2, 4, vec![0; 16]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        assert!(RgbFrame::new(2, 2, 3, vec![0; 11]).is_err());
        assert!(RgbFrame::new(0, 2, 3, vec![]).is_err());
    }

    #[test]
    fn constructors_reject_bad_values() {
        assert!(LuminanceFrame::new(1, 2, vec![0.5, 1.2]).is_err());
        assert!(LuminanceFrame::new(1, 2, vec![0.5]).is_err());
        assert!(EventFrame::new(1, 2, vec![0, 2], 0).is_err());
        assert!(SpikeFrame::new(2, 2, vec![true; 3], 0).is_err());
        assert!(RealFrame::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn validation_reports() {
        let empty: Vec<EventFrame> = vec![];
        assert_eq!(validate_frames(&empty), vec![Violation::Empty]);

        let mixed = vec![
            LuminanceFrame::constant(2, 3, 0.0).unwrap(),
            LuminanceFrame::constant(2, 4, 0.0).unwrap(),
        ];
        assert!(matches!(
            validate_frames(&mixed).as_slice(),
            [Violation::ShapeMismatch { position: 1, .. }]
        ));

        let ok: Vec<_> = (0..3).map(|i| EventFrame::zeros(2, 2, i).unwrap()).collect();
        assert!(validate_frames(&ok).is_empty());

        let gap = vec![EventFrame::zeros(2, 2, 0).unwrap(), EventFrame::zeros(2, 2, 2).unwrap()];
        assert!(matches!(
            validate_frames(&gap).as_slice(),
            [Violation::IndexGap {
                position: 1,
                expected: 1,
                found: 2
            }]
        ));
        assert!(FrameSequence::new(gap, 5.0).is_err());
    }

    #[test]
    fn sequence_rejects_bad_rate_but_allows_empty() {
        let frames = vec![SpikeFrame::empty(1, 1, 0).unwrap()];
        assert!(FrameSequence::new(frames, 0.0).is_err());
        let empty: FrameSequence<SpikeFrame> = FrameSequence::new(vec![], 5.0).unwrap();
        assert_eq!(empty.validate(), vec![Violation::Empty]);
    }

    proptest! {
        #[test]
        fn luminance_is_bounded(r in any::<u8>(), g in any::<u8>(), b in any::<u8>()) {
            let y = rgb_to_luminance(&RgbFrame::filled(1, 1, [r, g, b]).unwrap()).data()[0];
            prop_assert!((0.0..=1.0).contains(&y));
        }

        #[test]
        fn luminance_is_monotone(px in any::<[u8; 3]>(), channel in 0usize..3, bump in 1u8..=255) {
            let mut raised = px;
            raised[channel] = px[channel].saturating_add(bump);
            let lo = rgb_to_luminance(&RgbFrame::filled(1, 1, px).unwrap()).data()[0];
            let hi = rgb_to_luminance(&RgbFrame::filled(1, 1, raised).unwrap()).data()[0];
            prop_assert!(hi >= lo);
        }
    }
}
