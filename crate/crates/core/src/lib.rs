//! Convert ordinary frame sequences into simulated DVS event frames and
//! object-motion-sensitivity (OMS) spike frames, and account for the bandwidth
//! each representation needs.
//!
//! The pipeline is `RgbFrame -> LuminanceFrame -> EventFrame -> SpikeFrame`:
//!
//! ```
//! use omsense::{dvs_sequence, oms_sequence, FrameSequence, LuminanceFrame, SensorConfig};
//!
//! let frames = (0..3)
//!     .map(|t| LuminanceFrame::constant(16, 16, 0.2 + 0.1 * t as f64))
//!     .collect::<Result<Vec<_>, _>>()?;
//! let seq = FrameSequence::new(frames, 5.0)?;
//! let config = SensorConfig::default();
//! let events = dvs_sequence(&seq, &config)?;
//! let spikes = oms_sequence(&events, &config)?;
//! // global brightening fires every DVS pixel, and OMS suppresses all of it
//! assert_eq!(events.total_active(), 2 * 16 * 16);
//! assert_eq!(spikes.total_active(), 0);
//! # Ok::<(), omsense::Error>(())
//! ```

pub mod config;
pub mod dvs;
mod error;
pub mod frame;
pub mod io;
pub mod metrics;
pub mod oms;
pub mod synth;

pub use config::{BoundaryMode, SensorConfig};
pub use dvs::{dvs_sequence, dvs_step, log_transform, DvsState};
pub use error::{Error, Result};
pub use frame::{
    luminance_sequence, rgb_to_luminance, validate_frames, ActivityFrame, EventFrame, Frame, FrameSequence,
    LuminanceFrame, RealFrame, RgbFrame, SpikeFrame, Violation,
};
pub use oms::{convolve2d, oms_sequence, oms_step, DiskKernel, OmsFilter, OmsResponse};
