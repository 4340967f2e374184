//! Run configuration: defaults, then a TOML config file, then command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use omsense::metrics::Representation;
use omsense::{BoundaryMode, SensorConfig};
use serde::{Deserialize, Serialize};

use crate::failure::{config_error, Failure, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    /// P5 graymaps for DVS events, P4 bitmaps (.pbm) for OMS spikes
    Pgm,
    Png,
    Aer,
    /// Bit-rate report
    Csv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Dvs,
    Oms,
    #[default]
    Both,
}

impl Mode {
    pub fn dvs(self) -> bool {
        matches!(self, Mode::Dvs | Mode::Both)
    }

    pub fn oms(self) -> bool {
        matches!(self, Mode::Oms | Mode::Both)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Dvs => "dvs",
            Mode::Oms => "oms",
            Mode::Both => "both",
        })
    }
}

pub const DEFAULT_PATTERN: &str = "*.png";
pub const DEFAULT_FRAME_RATE: f64 = 5.0;
pub const MANIFEST_NAME: &str = "manifest.toml";

/// The full effective configuration of a run. Also the config-file and manifest schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub contrast_threshold: f64,
    pub oms_threshold: f64,
    pub center_radius: u32,
    pub surround_radius: u32,
    pub surround_weight: f64,
    pub boundary_mode: BoundaryMode,
    pub log_epsilon: f64,
    pub use_log: bool,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub pattern: String,
    pub frame_rate: f64,
    pub format: Vec<OutputFormat>,
    pub mode: Mode,
    /// AER streams to report on (metrics).
    pub aer: Vec<PathBuf>,
    /// `REP=HxW[@AVG_BITS]` rows (metrics).
    pub declare: Vec<String>,
    /// Scene file (synth).
    pub spec: Option<PathBuf>,
    /// F1 score per representation name.
    pub f1: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SensorConfig::default();
        Self {
            contrast_threshold: s.contrast_threshold,
            oms_threshold: s.oms_threshold,
            center_radius: s.center_radius,
            surround_radius: s.surround_radius,
            surround_weight: s.surround_weight,
            boundary_mode: s.boundary_mode,
            log_epsilon: s.log_epsilon,
            use_log: s.use_log,
            input: None,
            output: None,
            pattern: DEFAULT_PATTERN.into(),
            frame_rate: DEFAULT_FRAME_RATE,
            format: vec![OutputFormat::Aer, OutputFormat::Csv],
            mode: Mode::Both,
            aer: Vec::new(),
            declare: Vec::new(),
            spec: None,
            f1: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn sensor(&self) -> SensorConfig {
        SensorConfig {
            contrast_threshold: self.contrast_threshold,
            oms_threshold: self.oms_threshold,
            center_radius: self.center_radius,
            surround_radius: self.surround_radius,
            surround_weight: self.surround_weight,
            boundary_mode: self.boundary_mode,
            log_epsilon: self.log_epsilon,
            use_log: self.use_log,
        }
    }

    pub fn load(path: &Path) -> Outcome<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
        toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
    }

    /// Checks shared by every subcommand.
    pub fn validate(&self) -> Outcome {
        self.sensor().validate()?;
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return Err(config_error(format!(
                "frame rate must be positive, got {}",
                self.frame_rate
            )));
        }
        if let Err(e) = glob::Pattern::new(&self.pattern) {
            return Err(config_error(format!("bad file pattern {:?}: {e}", self.pattern)));
        }
        self.f1_table()?;
        Ok(())
    }

    pub fn f1_table(&self) -> Outcome<BTreeMap<Representation, f64>> {
        let mut out = BTreeMap::new();
        for (name, &v) in &self.f1 {
            let rep: Representation = name
                .parse()
                .map_err(|_| config_error(format!("unknown representation {name:?} in F1 inputs")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(config_error(format!("F1 for {name} must lie in [0, 1], got {v}")));
            }
            out.insert(rep, v);
        }
        Ok(out)
    }

    /// Make paths absolute so a manifest can be re-run from any directory.
    pub fn absolutize(&mut self) -> Outcome {
        let abs = |p: &mut PathBuf| -> Outcome {
            *p = std::path::absolute(&*p).map_err(|e| io_failure(p, e))?;
            Ok(())
        };
        for p in self
            .input
            .iter_mut()
            .chain(self.output.iter_mut())
            .chain(self.spec.iter_mut())
        {
            abs(p)?;
        }
        for p in &mut self.aer {
            abs(p)?;
        }
        Ok(())
    }

    pub fn write_manifest(&self, path: &Path) -> Outcome {
        let text = toml::to_string(self).map_err(|e| Failure::Core(omsense::Error::Undefined(e.to_string())))?;
        let body = format!(
            "# omsense run manifest; re-run with --config {}\n{text}",
            path.display()
        );
        fs::write(path, body).map_err(|e| io_failure(path, e))
    }
}

pub fn io_failure(path: &Path, source: std::io::Error) -> Failure {
    Failure::Core(omsense::Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Sensor flags shared by every subcommand. Unset flags fall back to the config file, then defaults.
#[derive(Args, Clone, Debug, Default)]
pub struct SensorArgs {
    /// TOML run configuration (same fields as the manifest); flags override it
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Log-intensity change that fires a DVS event [default: 0.1]
    #[arg(long, value_name = "C", allow_negative_numbers = true)]
    pub contrast_threshold: Option<f64>,

    /// Center minus weighted surround activity that fires an OMS spike [default: 0.1]
    #[arg(long, value_name = "T", allow_negative_numbers = true)]
    pub oms_threshold: Option<f64>,

    /// Center disk radius in pixels [default: 1]
    #[arg(long, value_name = "R1")]
    pub center_radius: Option<u32>,

    /// Surround disk radius in pixels [default: 5]
    #[arg(long, value_name = "R2")]
    pub surround_radius: Option<u32>,

    /// Weight on the surround response [default: 1]
    #[arg(long, value_name = "W", allow_negative_numbers = true)]
    pub surround_weight: Option<f64>,

    /// Convolution boundary: replicate or zero [default: replicate]
    #[arg(long, value_name = "MODE", value_parser = parse_boundary)]
    pub boundary: Option<BoundaryMode>,

    /// Compare log intensities (true) or raw intensities (false) [default: true]
    #[arg(long, value_name = "BOOL")]
    pub use_log: Option<bool>,

    /// Offset added to intensities before the log [default: 0.00392156862745098]
    #[arg(long, value_name = "EPS", allow_negative_numbers = true)]
    pub log_epsilon: Option<f64>,
}

fn parse_boundary(s: &str) -> Result<BoundaryMode, String> {
    BoundaryMode::from_str(s).map_err(|e| e.to_string())
}

impl SensorArgs {
    /// Defaults, then `--config`, then these flags.
    pub fn resolve(&self) -> Outcome<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.contrast_threshold {
            cfg.contrast_threshold = v;
        }
        if let Some(v) = self.oms_threshold {
            cfg.oms_threshold = v;
        }
        if let Some(v) = self.center_radius {
            cfg.center_radius = v;
        }
        if let Some(v) = self.surround_radius {
            cfg.surround_radius = v;
        }
        if let Some(v) = self.surround_weight {
            cfg.surround_weight = v;
        }
        if let Some(v) = self.boundary {
            cfg.boundary_mode = v;
        }
        if let Some(v) = self.use_log {
            cfg.use_log = v;
        }
        if let Some(v) = self.log_epsilon {
            cfg.log_epsilon = v;
        }
        Ok(cfg)
    }
}

/// Parse `NAME=VALUE`.
pub fn parse_f1(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected REP=VALUE")?;
    let value: f64 = value.parse().map_err(|e| format!("bad F1 value {value:?}: {e}"))?;
    Ok((name.trim().to_string(), value))
}
