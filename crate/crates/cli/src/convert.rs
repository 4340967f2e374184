use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use omsense::io::{encode_aer, matching_files, read_image_sequence, write_frames, FrameImageFormat};
use omsense::metrics::{write_csv, write_csv_with_ratios, BitRateReport, MetricsRow, Representation};
use omsense::{dvs_sequence, luminance_sequence, oms_sequence, EventFrame, FrameSequence, SensorConfig, SpikeFrame};
use rayon::prelude::*;

use crate::failure::{config_error, Outcome};
use crate::settings::{io_failure, Mode, OutputFormat, RunConfig, SensorArgs, MANIFEST_NAME};

#[derive(Args, Debug)]
pub struct ConvertArgs {
    /// Directory of frames, or of sub-directories holding one sequence each
    #[arg(long, short, value_name = "DIR")]
    pub input: Option<PathBuf>,

    /// Directory for outputs and the run manifest
    #[arg(long, short, value_name = "DIR")]
    pub output: Option<PathBuf>,

    /// File-name glob selecting frames, read in name order [default: *.png]
    #[arg(long, value_name = "GLOB")]
    pub pattern: Option<String>,

    /// Frames per second of the input [default: 5]
    #[arg(long, value_name = "FPS")]
    pub frame_rate: Option<f64>,

    /// Output formats, repeatable or comma separated [default: aer,csv]
    #[arg(long, value_enum, value_delimiter = ',', value_name = "FORMAT")]
    pub format: Vec<OutputFormat>,

    /// Which streams to write [default: both]
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,

    /// F1 score for a representation, e.g. dvs=0.155; adds per-bit columns to the CSV
    #[arg(long, value_name = "REP=VALUE", value_parser = crate::settings::parse_f1)]
    pub f1: Vec<(String, f64)>,

    #[command(flatten)]
    pub sensor: SensorArgs,
}

impl ConvertArgs {
    pub fn resolve(&self) -> Outcome<RunConfig> {
        let mut cfg = self.sensor.resolve()?;
        if let Some(p) = &self.input {
            cfg.input = Some(p.clone());
        }
        if let Some(p) = &self.output {
            cfg.output = Some(p.clone());
        }
        if let Some(p) = &self.pattern {
            cfg.pattern = p.clone();
        }
        if let Some(r) = self.frame_rate {
            cfg.frame_rate = r;
        }
        if !self.format.is_empty() {
            cfg.format = self.format.clone();
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        for (name, v) in &self.f1 {
            cfg.f1.insert(name.clone(), *v);
        }
        cfg.format.sort();
        cfg.format.dedup();
        cfg.absolutize()?;
        Ok(cfg)
    }
}

/// A named frame directory found under the input.
#[derive(Clone, Debug)]
pub struct SequenceDir {
    pub name: String,
    pub path: PathBuf,
    /// Output sub-directory; empty for a single sequence.
    pub relative: PathBuf,
}

/// The input itself if it holds matching frames, otherwise each sub-directory that does.
pub fn discover(input: &Path, pattern: &str) -> Outcome<Vec<SequenceDir>> {
    let display_name = |p: &Path| {
        p.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| ".".into())
    };
    if matching_files(input, pattern).is_ok() {
        return Ok(vec![SequenceDir {
            name: display_name(input),
            path: input.to_path_buf(),
            relative: PathBuf::new(),
        }]);
    }
    let entries = fs::read_dir(input).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => omsense::Error::NotFound(format!("input directory {}", input.display())).into(),
        _ => io_failure(input, e),
    })?;
    let mut subdirs = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| io_failure(input, e))?.path();
        if path.is_dir() && matching_files(&path, pattern).is_ok() {
            subdirs.push(path);
        }
    }
    if subdirs.is_empty() {
        return Err(omsense::Error::NotFound(format!(
            "no frames matching {pattern:?} in {} or its sub-directories",
            input.display()
        ))
        .into());
    }
    subdirs.sort();
    Ok(subdirs
        .into_iter()
        .map(|path| SequenceDir {
            name: display_name(&path),
            relative: PathBuf::from(path.file_name().expect("read_dir entries have names")),
            path,
        })
        .collect())
}

/// Per-representation bit-rate reports of one sequence.
#[derive(Clone, Debug)]
pub struct SequenceResult {
    pub name: String,
    pub reports: Vec<BitRateReport>,
    pub events: FrameSequence<EventFrame>,
    pub spikes: Option<FrameSequence<SpikeFrame>>,
}

/// Read, convert and measure one sequence. DVS always runs since OMS consumes it.
pub fn process(seq: &SequenceDir, cfg: &RunConfig, sensor: &SensorConfig) -> Outcome<SequenceResult> {
    let rgb = read_image_sequence(&seq.path, &cfg.pattern, cfg.frame_rate)?;
    let luminance = luminance_sequence(&rgb);
    let events = dvs_sequence(&luminance, sensor)?;
    let spikes = if cfg.mode.oms() {
        Some(oms_sequence(&events, sensor)?)
    } else {
        None
    };
    let mut reports = vec![BitRateReport::dense_of(Representation::Rgb, &rgb, 24)?];
    if cfg.mode.dvs() {
        reports.push(BitRateReport::from_sequence(Representation::Dvs, &events, 1)?);
    }
    if let Some(spikes) = &spikes {
        reports.push(BitRateReport::from_sequence(Representation::Oms, spikes, 1)?);
    }
    Ok(SequenceResult {
        name: seq.name.clone(),
        reports,
        events,
        spikes,
    })
}

pub fn metrics_rows(reports: &[BitRateReport], cfg: &RunConfig) -> Outcome<Vec<MetricsRow>> {
    let f1 = cfg.f1_table()?;
    reports
        .iter()
        .map(|r| Ok(MetricsRow::new(r, f1.get(&r.representation).copied())?))
        .collect()
}

/// CSV with ratio columns when every row has an F1 input and there is something to compare.
pub fn write_metrics<W: Write>(rows: &[MetricsRow], out: W) -> Outcome {
    let with_f1 = rows.iter().filter(|r| r.f1_input.is_some()).count();
    if with_f1 > 0 && with_f1 < rows.len() {
        let missing: Vec<String> = rows
            .iter()
            .filter(|r| r.f1_input.is_none())
            .map(|r| r.representation.to_string())
            .collect();
        return Err(config_error(format!(
            "F1 inputs given for some representations but not for {}",
            missing.join(", ")
        )));
    }
    if with_f1 >= 2 {
        write_csv_with_ratios(rows, out)?;
    } else {
        write_csv(rows, out)?;
    }
    Ok(())
}

/// Write the selected artifacts for one sequence into `dir`.
pub fn write_outputs(result: &SequenceResult, cfg: &RunConfig, dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    for format in &cfg.format {
        match format {
            OutputFormat::Pgm | OutputFormat::Png => {
                let image = if *format == OutputFormat::Pgm {
                    FrameImageFormat::Netpbm
                } else {
                    FrameImageFormat::Png
                };
                if cfg.mode.dvs() {
                    write_frames(&result.events, &dir.join("dvs"), image, "dvs_")?;
                }
                if let Some(spikes) = &result.spikes {
                    write_frames(spikes, &dir.join("oms"), image, "oms_")?;
                }
            }
            OutputFormat::Aer => {
                if cfg.mode.dvs() {
                    write_file(&dir.join("dvs.aer"), &encode_aer(&result.events)?)?;
                }
                if let Some(spikes) = &result.spikes {
                    write_file(&dir.join("oms.aer"), &encode_aer(spikes)?)?;
                }
            }
            OutputFormat::Csv => {
                let rows = metrics_rows(&result.reports, cfg)?;
                let mut buf = Vec::new();
                write_metrics(&rows, &mut buf)?;
                write_file(&dir.join("metrics.csv"), &buf)?;
            }
        }
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| io_failure(path, e))
}

pub fn run(args: &ConvertArgs) -> Outcome {
    let cfg = args.resolve()?;
    cfg.validate()?;
    let sensor = cfg.sensor();
    let input = cfg.input.clone().ok_or_else(|| config_error("convert needs --input"))?;
    let output = cfg
        .output
        .clone()
        .ok_or_else(|| config_error("convert needs --output"))?;
    // checked up front so a partial F1 table fails before any work
    let f1 = cfg.f1_table()?;
    if !f1.is_empty() && cfg.format.contains(&OutputFormat::Csv) {
        let mut wanted = vec![Representation::Rgb];
        if cfg.mode.dvs() {
            wanted.push(Representation::Dvs);
        }
        if cfg.mode.oms() {
            wanted.push(Representation::Oms);
        }
        if let Some(missing) = wanted.iter().find(|r| !f1.contains_key(r)) {
            return Err(config_error(format!("missing F1 input for {missing}")));
        }
    }
    let sequences = discover(&input, &cfg.pattern)?;
    fs::create_dir_all(&output).map_err(|e| io_failure(&output, e))?;

    eprintln!("convert: {} sequence(s) from {}", sequences.len(), input.display());
    let results: Vec<Outcome<SequenceResult>> = sequences
        .par_iter()
        .map(|seq| {
            let result = process(seq, &cfg, &sensor)?;
            write_outputs(&result, &cfg, &output.join(&seq.relative))?;
            eprintln!("convert: {} done ({} frames)", seq.name, result.events.len());
            Ok(result)
        })
        .collect();

    let mut stdout = std::io::stdout().lock();
    for result in results {
        let result = result?;
        for r in result
            .reports
            .iter()
            .filter(|r| r.representation != Representation::Rgb)
        {
            writeln!(
                stdout,
                "{}\t{}\tframes={}\tavg_bits_per_frame={}",
                result.name, r.representation, r.frame_count, r.avg_sparse_bits_per_frame
            )
            .map_err(|e| io_failure(Path::new("<stdout>"), e))?;
        }
    }
    cfg.write_manifest(&output.join(MANIFEST_NAME))
}
