//! Synthetic scenes with known ego-motion and object motion.
//!
//! The background is a periodic value-noise texture translated with toroidal wrap
//! by the ego velocity. An optional rectangular object carries its own texture,
//! offset in intensity, and moves with the background plus its own velocity.
//! Subpixel velocities are realized as whole-pixel shifts `floor(v * t)`, so no
//! frame is ever resampled.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::SensorConfig;
use crate::dvs::dvs_sequence;
use crate::error::{Error, Result};
use crate::frame::{ActivityFrame, EventFrame, FrameSequence, LuminanceFrame, SpikeFrame};
use crate::metrics::avg_bit_rate;
use crate::oms::oms_sequence;

const TEXTURE_FLOOR: f64 = 0.2;
const TEXTURE_SPAN: f64 = 0.6;
const OBJECT_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub height: usize,
    pub width: usize,
    pub background_seed: u64,
    /// Approximate feature size of the value noise, in pixels.
    pub texture_scale: f64,
    /// Background motion in pixels per frame, `[dx, dy]`.
    pub ego_velocity: [f64; 2],
    /// `[x, y, w, h]` of the object in frame 0; absent for a background-only scene.
    #[serde(default)]
    pub object_rect: Option<[usize; 4]>,
    /// Object motion relative to the background, pixels per frame.
    #[serde(default)]
    pub object_velocity: [f64; 2],
    #[serde(default)]
    pub object_intensity_delta: f64,
    pub frame_count: usize,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(Error::config("scene dimensions must be positive"));
        }
        if self.frame_count < 2 {
            return Err(Error::config(format!(
                "frame_count must be at least 2, got {}",
                self.frame_count
            )));
        }
        if !(self.texture_scale.is_finite() && self.texture_scale > 0.0) {
            return Err(Error::config("texture_scale must be positive"));
        }
        let finite = |v: [f64; 2]| v.iter().all(|c| c.is_finite());
        if !finite(self.ego_velocity) || !finite(self.object_velocity) || !self.object_intensity_delta.is_finite() {
            return Err(Error::config("velocities and intensity delta must be finite"));
        }
        if let Some([_, _, w, h]) = self.object_rect {
            if w == 0 || h == 0 {
                return Err(Error::config("object_rect must have positive size"));
            }
            for t in 0..self.frame_count {
                let (x, y) = self.object_origin(t);
                if x < 0 || y < 0 || x as usize + w > self.width || y as usize + h > self.height {
                    return Err(Error::config(format!(
                        "object leaves the frame at frame {t} (origin {x},{y})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whole-pixel background displacement at frame `t`.
    pub fn ego_shift(&self, t: usize) -> (i64, i64) {
        shift(self.ego_velocity, t)
    }

    /// Top-left corner of the object at frame `t` (zero when there is no object).
    pub fn object_origin(&self, t: usize) -> (i64, i64) {
        let Some([x, y, _, _]) = self.object_rect else {
            return (0, 0);
        };
        let v = [
            self.ego_velocity[0] + self.object_velocity[0],
            self.ego_velocity[1] + self.object_velocity[1],
        ];
        let (dx, dy) = shift(v, t);
        (x as i64 + dx, y as i64 + dy)
    }
}

fn shift(v: [f64; 2], t: usize) -> (i64, i64) {
    ((v[0] * t as f64).floor() as i64, (v[1] * t as f64).floor() as i64)
}

/// Per-frame object masks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTruth {
    height: usize,
    width: usize,
    masks: Vec<Vec<bool>>,
}

impl GroundTruth {
    pub fn new(height: usize, width: usize, masks: Vec<Vec<bool>>) -> Result<Self> {
        if masks.iter().any(|m| m.len() != height * width) {
            return Err(Error::invalid("mask size does not match frame size"));
        }
        Ok(Self { height, width, masks })
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn mask(&self, frame: usize) -> &[bool] {
        &self.masks[frame]
    }

    pub fn area(&self, frame: usize) -> usize {
        self.masks[frame].iter().filter(|&&m| m).count()
    }

    /// Masks grown by `radius` pixels in Chebyshev distance.
    pub fn dilated(&self, radius: usize) -> GroundTruth {
        let masks = self
            .masks
            .iter()
            .map(|m| dilate(m, self.height, self.width, radius))
            .collect();
        GroundTruth {
            height: self.height,
            width: self.width,
            masks,
        }
    }
}

fn dilate(mask: &[bool], h: usize, w: usize, radius: usize) -> Vec<bool> {
    if radius == 0 {
        return mask.to_vec();
    }
    // separable square max filter: rows then columns
    let mut rows = vec![false; h * w];
    for y in 0..h {
        for x in 0..w {
            let lo = x.saturating_sub(radius);
            let hi = (x + radius).min(w - 1);
            rows[y * w + x] = mask[y * w + lo..=y * w + hi].iter().any(|&m| m);
        }
    }
    let mut out = vec![false; h * w];
    for y in 0..h {
        let lo = y.saturating_sub(radius);
        let hi = (y + radius).min(h - 1);
        for x in 0..w {
            out[y * w + x] = (lo..=hi).any(|yy| rows[yy * w + x]);
        }
    }
    out
}

/// Periodic value noise in `[0, 1]` over an `h x w` torus.
fn value_noise(h: usize, w: usize, scale: f64, seed: u64) -> Vec<f64> {
    let cells_x = ((w as f64 / scale).round() as usize).max(1);
    let cells_y = ((h as f64 / scale).round() as usize).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lattice: Vec<f64> = (0..cells_x * cells_y).map(|_| rng.gen::<f64>()).collect();
    let at = |ix: usize, iy: usize| lattice[(iy % cells_y) * cells_x + ix % cells_x];
    let smooth = |f: f64| f * f * (3.0 - 2.0 * f);

    let mut out = Vec::with_capacity(h * w);
    for y in 0..h {
        let v = y as f64 * cells_y as f64 / h as f64;
        let iy = v.floor() as usize;
        let fy = smooth(v - iy as f64);
        for x in 0..w {
            let u = x as f64 * cells_x as f64 / w as f64;
            let ix = u.floor() as usize;
            let fx = smooth(u - ix as f64);
            let top = at(ix, iy) * (1.0 - fx) + at(ix + 1, iy) * fx;
            let bottom = at(ix, iy + 1) * (1.0 - fx) + at(ix + 1, iy + 1) * fx;
            out.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    out
}

/// Default frame rate of rendered scenes, frames per second.
pub const SCENE_FRAME_RATE: f64 = 5.0;

pub fn render_scene(spec: &SceneSpec) -> Result<(FrameSequence<LuminanceFrame>, GroundTruth)> {
    spec.validate()?;
    let (h, w) = (spec.height, spec.width);
    let background = value_noise(h, w, spec.texture_scale, spec.background_seed);
    let object_texture = spec
        .object_rect
        .map(|_| value_noise(h, w, spec.texture_scale, spec.background_seed ^ OBJECT_SEED_SALT));

    let mut frames = Vec::with_capacity(spec.frame_count);
    let mut masks = Vec::with_capacity(spec.frame_count);
    for t in 0..spec.frame_count {
        let (dx, dy) = spec.ego_shift(t);
        let mut data = Vec::with_capacity(h * w);
        for y in 0..h {
            let sy = (y as i64 - dy).rem_euclid(h as i64) as usize;
            for x in 0..w {
                let sx = (x as i64 - dx).rem_euclid(w as i64) as usize;
                data.push(TEXTURE_FLOOR + TEXTURE_SPAN * background[sy * w + sx]);
            }
        }
        let mut mask = vec![false; h * w];
        if let (Some([_, _, ow, oh]), Some(tex)) = (spec.object_rect, &object_texture) {
            let (ox, oy) = spec.object_origin(t);
            let (ox, oy) = (ox as usize, oy as usize);
            for v in 0..oh {
                for u in 0..ow {
                    let i = (oy + v) * w + ox + u;
                    let value = TEXTURE_FLOOR + TEXTURE_SPAN * tex[v * w + u] + spec.object_intensity_delta;
                    data[i] = value.clamp(0.0, 1.0);
                    mask[i] = true;
                }
            }
        }
        frames.push(LuminanceFrame::new(h, w, data)?);
        masks.push(mask);
    }
    Ok((
        FrameSequence::new(frames, SCENE_FRAME_RATE)?,
        GroundTruth::new(h, w, masks)?,
    ))
}

/// Total OMS spikes over total DVS events.
pub fn suppression_ratio(dvs: &FrameSequence<EventFrame>, oms: &FrameSequence<SpikeFrame>) -> Result<f64> {
    if dvs.len() != oms.len() || dvs.shape() != oms.shape() {
        return Err(Error::invalid("DVS and OMS sequences differ in length or shape"));
    }
    let events = dvs.total_active();
    if events == 0 {
        return Err(Error::Undefined("suppression ratio: no DVS events".into()));
    }
    Ok(oms.total_active() as f64 / events as f64)
}

/// Fraction of active pixels that fall inside the object mask grown by `dilation`.
pub fn object_spike_fraction<F: ActivityFrame>(
    seq: &FrameSequence<F>,
    truth: &GroundTruth,
    dilation: usize,
) -> Result<f64> {
    if seq.len() != truth.len() || seq.shape().is_some_and(|s| s != (truth.height, truth.width)) {
        return Err(Error::invalid("activity and ground truth differ in length or shape"));
    }
    let grown = truth.dilated(dilation);
    let mut inside = 0usize;
    let mut total = 0usize;
    for (t, frame) in seq.frames().iter().enumerate() {
        let mask = grown.mask(t);
        for (i, &m) in mask.iter().enumerate() {
            if frame.is_active(i) {
                total += 1;
                inside += usize::from(m);
            }
        }
    }
    if total == 0 {
        return Err(Error::Undefined("object fraction: no active pixels".into()));
    }
    Ok(inside as f64 / total as f64)
}

/// Measurements from running both pipelines over one scene.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneReport {
    pub frames: usize,
    pub dvs_events: usize,
    pub oms_spikes: usize,
    pub dvs_avg_bits: f64,
    pub oms_avg_bits: f64,
    /// `None` when the scene produced no DVS events.
    pub suppression_ratio: Option<f64>,
    pub dvs_object_fraction: Option<f64>,
    pub oms_object_fraction: Option<f64>,
}

/// Everything produced by [`run_scene`].
#[derive(Clone, Debug)]
pub struct SceneRun {
    pub luminance: FrameSequence<LuminanceFrame>,
    pub truth: GroundTruth,
    pub events: FrameSequence<EventFrame>,
    pub spikes: FrameSequence<SpikeFrame>,
    pub report: SceneReport,
}

/// Render `spec`, run DVS and OMS, and measure. Object fractions use the
/// surround radius as dilation and are only computed for scenes with an object.
pub fn run_scene(spec: &SceneSpec, config: &SensorConfig) -> Result<SceneRun> {
    let (luminance, truth) = render_scene(spec)?;
    let events = dvs_sequence(&luminance, config)?;
    let spikes = oms_sequence(&events, config)?;
    let dilation = config.surround_radius as usize;
    let has_object = spec.object_rect.is_some();
    let fraction = |r: Result<f64>| -> Result<Option<f64>> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(Error::Undefined(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let report = SceneReport {
        frames: events.len(),
        dvs_events: events.total_active(),
        oms_spikes: spikes.total_active(),
        dvs_avg_bits: avg_bit_rate(&events, 1)?,
        oms_avg_bits: avg_bit_rate(&spikes, 1)?,
        suppression_ratio: fraction(suppression_ratio(&events, &spikes))?,
        dvs_object_fraction: if has_object {
            fraction(object_spike_fraction(&events, &truth, dilation))?
        } else {
            None
        },
        oms_object_fraction: if has_object {
            fraction(object_spike_fraction(&spikes, &truth, dilation))?
        } else {
            None
        },
    };
    Ok(SceneRun {
        luminance,
        truth,
        events,
        spikes,
        report,
    })
}

impl SceneReport {
    /// `metric,value` rows; undefined measurements are left empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["metric", "value"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let rows = [
            ("frames", self.frames.to_string()),
            ("dvs_events", self.dvs_events.to_string()),
            ("oms_spikes", self.oms_spikes.to_string()),
            ("dvs_avg_bits_per_frame", self.dvs_avg_bits.to_string()),
            ("oms_avg_bits_per_frame", self.oms_avg_bits.to_string()),
            ("suppression_ratio", opt(self.suppression_ratio)),
            ("dvs_object_fraction", opt(self.dvs_object_fraction)),
            ("oms_object_fraction", opt(self.oms_object_fraction)),
        ];
        for (k, v) in rows {
            w.write_record([k, v.as_str()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Checks a scene file may declare; all optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneAssertions {
    /// Require `suppression_ratio` strictly below this value.
    pub max_suppression_ratio: Option<f64>,
    /// Require the OMS object fraction to be at least the DVS object fraction.
    pub oms_object_fraction_at_least_dvs: bool,
    /// Require fewer average OMS bits per frame than DVS bits.
    pub oms_bits_below_dvs: bool,
}

impl SceneAssertions {
    /// Human-readable descriptions of every failed check.
    pub fn check(&self, report: &SceneReport) -> Vec<String> {
        let mut failed = Vec::new();
        if let Some(limit) = self.max_suppression_ratio {
            match report.suppression_ratio {
                Some(r) if r < limit => {}
                Some(r) => failed.push(format!("suppression_ratio {r} is not below {limit}")),
                None => failed.push("suppression_ratio undefined (no DVS events)".into()),
            }
        }
        if self.oms_object_fraction_at_least_dvs {
            match (report.oms_object_fraction, report.dvs_object_fraction) {
                (Some(o), Some(d)) if o >= d => {}
                (o, d) => failed.push(format!(
                    "OMS object fraction {o:?} is not at least DVS object fraction {d:?}"
                )),
            }
        }
        if self.oms_bits_below_dvs && report.oms_avg_bits >= report.dvs_avg_bits {
            failed.push(format!(
                "OMS average bits {} not below DVS average bits {}",
                report.oms_avg_bits, report.dvs_avg_bits
            ));
        }
        failed
    }
}

/// Scene description file: the scene fields at top level plus an optional
/// `[assertions]` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    #[serde(flatten)]
    pub scene: SceneSpec,
    #[serde(default)]
    pub assertions: SceneAssertions,
}

impl SceneFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: SceneFile = toml::from_str(text).map_err(|e| Error::config(format!("scene file: {e}")))?;
        file.scene.validate()?;
        Ok(file)
    }
}
