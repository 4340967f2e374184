use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use omsense::io::{encode_aer, write_frames, FrameImageFormat};
use omsense::synth::{run_scene, SceneFile, SceneReport};

use crate::failure::{config_error, Failure, Outcome};
use crate::settings::{io_failure, OutputFormat, RunConfig, SensorArgs, MANIFEST_NAME};

pub const DEFAULT_OUTPUT: &str = "synth-out";

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Scene description (TOML) with an optional [assertions] table
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,

    /// Directory for baselines.csv, the manifest and any frame outputs [default: synth-out]
    #[arg(long, short, value_name = "DIR")]
    pub output: Option<PathBuf>,

    /// Also write rendered event/spike frames in these formats (pgm, png, aer)
    #[arg(long, value_enum, value_delimiter = ',', value_name = "FORMAT")]
    pub format: Vec<OutputFormat>,

    #[command(flatten)]
    pub sensor: SensorArgs,
}

impl SynthArgs {
    pub fn resolve(&self) -> Outcome<RunConfig> {
        let mut cfg = self.sensor.resolve()?;
        if self.sensor.config.is_none() {
            // convert's default formats make no sense for a scene check
            cfg.format.clear();
        }
        if let Some(p) = &self.spec {
            cfg.spec = Some(p.clone());
        }
        if let Some(p) = &self.output {
            cfg.output = Some(p.clone());
        }
        if cfg.output.is_none() {
            cfg.output = Some(DEFAULT_OUTPUT.into());
        }
        if !self.format.is_empty() {
            cfg.format = self.format.clone();
        }
        cfg.format.sort();
        cfg.format.dedup();
        cfg.absolutize()?;
        Ok(cfg)
    }
}

fn show(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "undefined".into())
}

pub fn report_lines(report: &SceneReport) -> Vec<String> {
    vec![
        format!("frames {}", report.frames),
        format!("dvs_events {}", report.dvs_events),
        format!("oms_spikes {}", report.oms_spikes),
        format!("dvs_avg_bits_per_frame {}", report.dvs_avg_bits),
        format!("oms_avg_bits_per_frame {}", report.oms_avg_bits),
        format!("suppression_ratio {}", show(report.suppression_ratio)),
        format!("dvs_object_fraction {}", show(report.dvs_object_fraction)),
        format!("oms_object_fraction {}", show(report.oms_object_fraction)),
    ]
}

pub fn run(args: &SynthArgs) -> Outcome {
    let cfg = args.resolve()?;
    cfg.validate()?;
    let spec_path = cfg.spec.clone().ok_or_else(|| config_error("synth needs --spec"))?;
    let output = cfg.output.clone().expect("resolve fills a default");
    let text = fs::read_to_string(&spec_path).map_err(|e| io_failure(&spec_path, e))?;
    let scene = SceneFile::parse(&text)?;

    eprintln!(
        "synth: rendering {}x{} x {} frames from {}",
        scene.scene.height,
        scene.scene.width,
        scene.scene.frame_count,
        spec_path.display()
    );
    let run = run_scene(&scene.scene, &cfg.sensor())?;
    for line in report_lines(&run.report) {
        println!("{line}");
    }

    fs::create_dir_all(&output).map_err(|e| io_failure(&output, e))?;
    let baselines = output.join("baselines.csv");
    let mut buf = Vec::new();
    run.report.write_csv(&mut buf)?;
    fs::write(&baselines, buf).map_err(|e| io_failure(&baselines, e))?;
    for format in &cfg.format {
        match format {
            OutputFormat::Pgm | OutputFormat::Png => {
                let image = if *format == OutputFormat::Pgm {
                    FrameImageFormat::Netpbm
                } else {
                    FrameImageFormat::Png
                };
                write_frames(&run.events, &output.join("dvs"), image, "dvs_")?;
                write_frames(&run.spikes, &output.join("oms"), image, "oms_")?;
            }
            OutputFormat::Aer => {
                write_bytes(&output.join("dvs.aer"), &encode_aer(&run.events)?)?;
                write_bytes(&output.join("oms.aer"), &encode_aer(&run.spikes)?)?;
            }
            OutputFormat::Csv => {}
        }
    }
    cfg.write_manifest(&output.join(MANIFEST_NAME))?;

    if run.report.dvs_events == 0 {
        println!("no DVS events");
        return Err(Failure::NoSignal(format!(
            "scene {} produced no DVS events",
            spec_path.display()
        )));
    }
    let failed = scene.assertions.check(&run.report);
    if !failed.is_empty() {
        return Err(Failure::Assertions(failed));
    }
    Ok(())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| io_failure(path, e))
}
