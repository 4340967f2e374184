//! Frame-based approximation of a dynamic vision sensor.
//!
//! Each pixel compares its (log) intensity against the previous frame and emits
//! +1 or -1 when the change strictly exceeds the contrast threshold `C`. The
//! reference is replaced by the current frame after every step, so this is plain
//! frame differencing rather than per-pixel reset-on-event.

use crate::config::SensorConfig;
use crate::error::{Error, Result};
use crate::frame::{EventFrame, Frame, FrameSequence, LuminanceFrame, RealFrame};

/// Per-pixel `ln(value + epsilon)`.
pub fn log_transform(frame: &LuminanceFrame, epsilon: f64) -> Result<RealFrame> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::config(format!("log epsilon must be positive, got {epsilon}")));
    }
    let data = frame.data().iter().map(|&v| (v + epsilon).ln()).collect();
    Ok(RealFrame::from_parts(frame.height(), frame.width(), data))
}

/// Ternary event for one intensity change. Ties at exactly `±threshold` are silent.
#[inline]
pub fn polarity(delta: f64, threshold: f64) -> i8 {
    if delta > threshold {
        1
    } else if delta < -threshold {
        -1
    } else {
        0
    }
}

/// Streaming DVS state: the previous frame's intensity in the working domain.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DvsState {
    reference: Option<RealFrame>,
    next_index: u32,
}

impl DvsState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_initialized(&self) -> bool {
        self.reference.is_some()
    }

    pub fn reference(&self) -> Option<&RealFrame> {
        self.reference.as_ref()
    }

    /// Consume one luminance frame and return its event frame.
    ///
    /// The first frame only primes the reference and yields no events.
    pub fn step(&mut self, frame: &LuminanceFrame, config: &SensorConfig) -> Result<EventFrame> {
        let current = if config.use_log {
            log_transform(frame, config.log_epsilon)?
        } else {
            RealFrame::from_parts(frame.height(), frame.width(), frame.data().to_vec())
        };
        let index = self.next_index;
        let events = match &self.reference {
            None => EventFrame::zeros(frame.height(), frame.width(), index)?,
            Some(reference) => {
                if reference.shape() != current.shape() {
                    return Err(Error::invalid(format!(
                        "frame is {}x{} but the DVS reference is {}x{}",
                        current.height(),
                        current.width(),
                        reference.height(),
                        reference.width()
                    )));
                }
                let data = current
                    .data()
                    .iter()
                    .zip(reference.data())
                    .map(|(now, before)| polarity(now - before, config.contrast_threshold))
                    .collect();
                EventFrame::new(current.height(), current.width(), data, index)?
            }
        };
        self.reference = Some(current);
        self.next_index += 1;
        Ok(events)
    }
}

/// Functional form of [`DvsState::step`].
pub fn dvs_step(mut state: DvsState, frame: &LuminanceFrame, config: &SensorConfig) -> Result<(EventFrame, DvsState)> {
    let events = state.step(frame, config)?;
    Ok((events, state))
}

/// Run the DVS stage over a whole sequence. Frame 0 is always silent.
pub fn dvs_sequence(seq: &FrameSequence<LuminanceFrame>, config: &SensorConfig) -> Result<FrameSequence<EventFrame>> {
    config.validate()?;
    seq.require_nonempty("dvs")?;
    let mut state = DvsState::new();
    let frames = seq
        .frames()
        .iter()
        .map(|f| state.step(f, config))
        .collect::<Result<Vec<_>>>()?;
    FrameSequence::new(frames, seq.frame_rate())
}
