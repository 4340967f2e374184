//! Object motion sensitivity: center-surround filtering of DVS activity.
//!
//! Events are rectified to activity in `{0, 1}` so ON and OFF events both count as
//! contrast, then averaged by a small center disk and a larger surround disk. A
//! pixel spikes when the center response exceeds the weighted surround response
//! by more than the OMS threshold.

mod convolve;
mod kernel;

pub use convolve::convolve2d;
pub use kernel::{DiskKernel, SUPERSAMPLE};

use crate::config::SensorConfig;
use crate::error::{Error, Result};
use crate::frame::{EventFrame, Frame, FrameSequence, RealFrame, SpikeFrame};

/// Intermediate planes of one OMS evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct OmsResponse {
    pub center_response: RealFrame,
    pub surround_response: RealFrame,
    pub difference: RealFrame,
    pub spikes: SpikeFrame,
}

/// Center and surround kernels built once for a configuration.
#[derive(Clone, Debug)]
pub struct OmsFilter {
    center: DiskKernel,
    surround: DiskKernel,
    config: SensorConfig,
}

impl OmsFilter {
    pub fn new(config: &SensorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            center: DiskKernel::new(config.center_radius)?,
            surround: DiskKernel::new(config.surround_radius)?,
            config: config.clone(),
        })
    }

    pub fn center(&self) -> &DiskKernel {
        &self.center
    }

    pub fn surround(&self) -> &DiskKernel {
        &self.surround
    }

    pub fn apply(&self, events: &EventFrame) -> Result<OmsResponse> {
        let (h, w) = events.shape();
        let side = self.surround.side();
        if h < side || w < side {
            return Err(Error::invalid(format!(
                "{h}x{w} event frame is smaller than the {side}x{side} surround kernel"
            )));
        }
        let activity = rectify(events);
        let boundary = self.config.boundary_mode;
        let center_response = convolve2d(&activity, &self.center, boundary)?;
        let surround_raw = convolve2d(&activity, &self.surround, boundary)?;
        let weight = self.config.surround_weight;
        let surround_response =
            RealFrame::from_parts(h, w, surround_raw.into_data().into_iter().map(|v| weight * v).collect());
        let difference: Vec<f64> = center_response
            .data()
            .iter()
            .zip(surround_response.data())
            .map(|(c, s)| c - s)
            .collect();
        let threshold = self.config.oms_threshold;
        let spikes = SpikeFrame::new(
            h,
            w,
            difference.iter().map(|&d| d > threshold).collect(),
            events.frame_index().unwrap_or(0),
        )?;
        Ok(OmsResponse {
            center_response,
            surround_response,
            difference: RealFrame::from_parts(h, w, difference),
            spikes,
        })
    }

    pub fn spikes(&self, events: &EventFrame) -> Result<SpikeFrame> {
        self.apply(events).map(|r| r.spikes)
    }
}

/// `|event|` as a real plane.
pub fn rectify(events: &EventFrame) -> RealFrame {
    RealFrame::from_parts(
        events.height(),
        events.width(),
        events.data().iter().map(|&p| f64::from(p.unsigned_abs())).collect(),
    )
}

pub fn oms_step(events: &EventFrame, config: &SensorConfig) -> Result<OmsResponse> {
    OmsFilter::new(config)?.apply(events)
}

/// Apply OMS to every frame independently.
pub fn oms_sequence(events: &FrameSequence<EventFrame>, config: &SensorConfig) -> Result<FrameSequence<SpikeFrame>> {
    events.require_nonempty("oms")?;
    let filter = OmsFilter::new(config)?;

    #[cfg(feature = "parallel")]
    let frames = {
        use rayon::prelude::*;
        events
            .frames()
            .par_iter()
            .map(|f| filter.spikes(f))
            .collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let frames = events
        .frames()
        .iter()
        .map(|f| filter.spikes(f))
        .collect::<Result<Vec<_>>>()?;

    FrameSequence::new(frames, events.frame_rate())
}
