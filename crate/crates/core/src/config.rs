use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How samples outside the frame are resolved during convolution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// Clamp to the nearest edge pixel.
    #[default]
    Replicate,
    /// Treat out-of-frame samples as zero.
    Zero,
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryMode::Replicate => "replicate",
            BoundaryMode::Zero => "zero",
        })
    }
}

impl FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "replicate" => Ok(BoundaryMode::Replicate),
            "zero" => Ok(BoundaryMode::Zero),
            other => Err(Error::config(format!(
                "unknown boundary mode {other:?} (expected replicate or zero)"
            ))),
        }
    }
}

/// Every tunable parameter of the DVS and OMS stages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    /// Temporal contrast threshold `C` for DVS events.
    pub contrast_threshold: f64,
    /// Threshold on center minus weighted surround response.
    pub oms_threshold: f64,
    pub center_radius: u32,
    pub surround_radius: u32,
    pub surround_weight: f64,
    pub boundary_mode: BoundaryMode,
    /// Offset added before taking the logarithm so that black pixels stay finite.
    pub log_epsilon: f64,
    /// Difference log intensities (true) or raw luminance (false).
    pub use_log: bool,
}

impl SensorConfig {
    pub const DEFAULT_CONTRAST_THRESHOLD: f64 = 0.1;
    pub const DEFAULT_OMS_THRESHOLD: f64 = 0.1;
    pub const DEFAULT_CENTER_RADIUS: u32 = 1;
    pub const DEFAULT_SURROUND_RADIUS: u32 = 5;
    pub const DEFAULT_SURROUND_WEIGHT: f64 = 1.0;
    pub const DEFAULT_LOG_EPSILON: f64 = 1.0 / 255.0;

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("contrast_threshold", self.contrast_threshold)?;
        positive("oms_threshold", self.oms_threshold)?;
        positive("log_epsilon", self.log_epsilon)?;
        if !(self.surround_weight.is_finite() && self.surround_weight >= 0.0) {
            return Err(Error::config(format!(
                "surround_weight must be nonnegative, got {}",
                self.surround_weight
            )));
        }
        if self.center_radius < 1 {
            return Err(Error::config("center_radius must be at least 1"));
        }
        if self.center_radius >= self.surround_radius {
            return Err(Error::config(format!(
                "center_radius ({}) must be smaller than surround_radius ({})",
                self.center_radius, self.surround_radius
            )));
        }
        Ok(())
    }
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            contrast_threshold: Self::DEFAULT_CONTRAST_THRESHOLD,
            oms_threshold: Self::DEFAULT_OMS_THRESHOLD,
            center_radius: Self::DEFAULT_CENTER_RADIUS,
            surround_radius: Self::DEFAULT_SURROUND_RADIUS,
            surround_weight: Self::DEFAULT_SURROUND_WEIGHT,
            boundary_mode: BoundaryMode::Replicate,
            log_epsilon: Self::DEFAULT_LOG_EPSILON,
            use_log: true,
        }
    }
}
