//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations: view a disk kernel, step through DVS and OMS frames of a
//! synthetic scene while changing sensor parameters, and compute per-bit scores.

use omsense::metrics::{perf_per_bit, ratio_table};
use omsense::synth::{run_scene, SceneRun, SceneSpec};
use omsense::{ActivityFrame, BoundaryMode, DiskKernel, SensorConfig};
use wasm_bindgen::prelude::*;

/// Row-major weights of the disk kernel of `radius`; the side is `2 * radius + 1`.
#[wasm_bindgen]
pub fn disk_kernel(radius: u32) -> Result<Vec<f64>, String> {
    DiskKernel::new(radius)
        .map(|k| k.weights().to_vec())
        .map_err(|e| e.to_string())
}

/// `[perf/bit rgb, dvs, oms, dvs-vs-rgb gain, oms-vs-dvs gain]`; gains are ratio - 1.
#[wasm_bindgen]
pub fn per_bit_scores(f1: Vec<f64>, avg_bits: Vec<f64>) -> Result<Vec<f64>, String> {
    if f1.len() != 3 || avg_bits.len() != 3 {
        return Err("need three F1 scores and three bit rates (rgb, dvs, oms)".into());
    }
    let entries = f1
        .iter()
        .zip(&avg_bits)
        .map(|(&f, &b)| perf_per_bit(f, b))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let table = ratio_table(&entries).map_err(|e| e.to_string())?;
    let mut out: Vec<f64> = entries.iter().map(|e| e.ratio).collect();
    out.push(table.gain(1, 0));
    out.push(table.gain(2, 1));
    Ok(out)
}

/// A rendered scene plus its DVS and OMS outputs under the current sensor settings.
#[wasm_bindgen]
pub struct Explorer {
    spec: SceneSpec,
    run: SceneRun,
}

#[wasm_bindgen]
impl Explorer {
    /// `object_speed` is the object's on-screen motion in pixels per frame along x;
    /// zero size disables the object.
    #[wasm_bindgen(constructor)]
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        size: usize,
        frames: usize,
        seed: u32,
        texture_scale: f64,
        ego_x: f64,
        ego_y: f64,
        object_size: usize,
        object_speed: f64,
    ) -> Result<Explorer, String> {
        let object_rect = (object_size > 0).then(|| {
            let y = size.saturating_sub(object_size) / 2;
            [size / 8, y, object_size, (object_size * 2 / 3).max(1)]
        });
        let spec = SceneSpec {
            height: size,
            width: size,
            background_seed: u64::from(seed),
            texture_scale,
            ego_velocity: [ego_x, ego_y],
            object_rect,
            // the object holds its vertical screen position and moves at object_speed along x
            object_velocity: [object_speed - ego_x, -ego_y],
            object_intensity_delta: 0.1,
            frame_count: frames,
        };
        let run = run_scene(&spec, &SensorConfig::default()).map_err(|e| e.to_string())?;
        Ok(Explorer { spec, run })
    }

    /// Re-run DVS and OMS with new parameters. Boundary is `"replicate"` or `"zero"`.
    pub fn configure(
        &mut self,
        contrast_threshold: f64,
        oms_threshold: f64,
        center_radius: u32,
        surround_radius: u32,
        surround_weight: f64,
        boundary: &str,
    ) -> Result<(), String> {
        let boundary_mode: BoundaryMode = boundary.parse().map_err(|e: omsense::Error| e.to_string())?;
        let config = SensorConfig {
            contrast_threshold,
            oms_threshold,
            center_radius,
            surround_radius,
            surround_weight,
            boundary_mode,
            ..SensorConfig::default()
        };
        self.run = run_scene(&self.spec, &config).map_err(|e| e.to_string())?;
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.spec.width
    }

    pub fn frame_count(&self) -> usize {
        self.run.events.len()
    }

    /// RGBA pixels of frame `t`: `"scene"` (gray, object outlined), `"dvs"` or `"oms"`.
    pub fn rgba(&self, kind: &str, t: usize) -> Result<Vec<u8>, String> {
        let t = t.min(self.frame_count().saturating_sub(1));
        let mut out = Vec::with_capacity(self.spec.width * self.spec.height * 4);
        match kind {
            "scene" => {
                let lum = &self.run.luminance.frames()[t];
                let mask = self.run.truth.mask(t);
                for (i, &v) in lum.data().iter().enumerate() {
                    let g = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
                    let edge = mask[i] && self.is_mask_edge(t, i);
                    out.extend(if edge { [255, 80, 40, 255] } else { [g, g, g, 255] });
                }
            }
            "dvs" => {
                for &p in self.run.events.frames()[t].data() {
                    out.extend(match p {
                        1 => [255, 255, 255, 255],
                        -1 => [40, 120, 255, 255],
                        _ => [0, 0, 0, 255],
                    });
                }
            }
            "oms" => {
                for &s in self.run.spikes.frames()[t].data() {
                    out.extend(if s { [255, 220, 60, 255] } else { [0, 0, 0, 255] });
                }
            }
            other => return Err(format!("unknown view {other:?}")),
        }
        Ok(out)
    }

    fn is_mask_edge(&self, t: usize, i: usize) -> bool {
        let (w, h) = (self.spec.width, self.spec.height);
        let mask = self.run.truth.mask(t);
        let (y, x) = (i / w, i % w);
        let inside = |yy: usize, xx: usize| mask[yy * w + xx];
        x == 0
            || y == 0
            || x + 1 == w
            || y + 1 == h
            || !inside(y - 1, x)
            || !inside(y + 1, x)
            || !inside(y, x - 1)
            || !inside(y, x + 1)
    }

    pub fn dvs_events(&self, t: usize) -> usize {
        self.run.events.frames().get(t).map_or(0, |f| f.active_count())
    }

    pub fn oms_spikes(&self, t: usize) -> usize {
        self.run.spikes.frames().get(t).map_or(0, |f| f.active_count())
    }

    pub fn dvs_avg_bits(&self) -> f64 {
        self.run.report.dvs_avg_bits
    }

    pub fn oms_avg_bits(&self) -> f64 {
        self.run.report.oms_avg_bits
    }

    /// NaN when the scene produced no DVS events.
    pub fn suppression_ratio(&self) -> f64 {
        self.run.report.suppression_ratio.unwrap_or(f64::NAN)
    }

    /// NaN without an object or without activity.
    pub fn dvs_object_fraction(&self) -> f64 {
        self.run.report.dvs_object_fraction.unwrap_or(f64::NAN)
    }

    pub fn oms_object_fraction(&self) -> f64 {
        self.run.report.oms_object_fraction.unwrap_or(f64::NAN)
    }
}
