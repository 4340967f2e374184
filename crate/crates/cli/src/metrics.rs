use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use omsense::io::{decode_aer, AerSequence, DecodeOptions};
use omsense::metrics::{format_sig, perf_per_bit, ratio_table, BitRateReport, MetricsRow, Representation};

use crate::convert::{discover, metrics_rows, process, write_metrics};
use crate::failure::{config_error, Outcome};
use crate::settings::{io_failure, Mode, RunConfig, SensorArgs};

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Frame directory to convert and measure (all sequences under it are pooled)
    #[arg(long, short, value_name = "DIR")]
    pub input: Option<PathBuf>,

    /// File-name glob selecting frames [default: *.png]
    #[arg(long, value_name = "GLOB")]
    pub pattern: Option<String>,

    /// Frames per second of the input [default: 5]
    #[arg(long, value_name = "FPS")]
    pub frame_rate: Option<f64>,

    /// AER stream to measure; signed streams count as dvs, unsigned as oms. Repeatable
    #[arg(long, value_name = "FILE")]
    pub aer: Vec<PathBuf>,

    /// Row from known figures: REP=HxW for a dense row, REP=HxW@AVG_BITS otherwise. Repeatable
    #[arg(long, value_name = "SPEC")]
    pub declare: Vec<String>,

    /// F1 score for a representation, e.g. oms=0.126. Repeatable
    #[arg(long, value_name = "REP=VALUE", value_parser = crate::settings::parse_f1)]
    pub f1: Vec<(String, f64)>,

    /// Write the CSV here (plus <FILE>.manifest.toml) instead of standard output
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,

    #[command(flatten)]
    pub sensor: SensorArgs,
}

impl MetricsArgs {
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
        cfg.aer.extend(self.aer.iter().cloned());
        cfg.declare.extend(self.declare.iter().cloned());
        for (name, v) in &self.f1 {
            cfg.f1.insert(name.clone(), *v);
        }
        cfg.absolutize()?;
        Ok(cfg)
    }
}

/// Parse `REP=HxW` or `REP=HxW@AVG_BITS`. Without an average the row is dense,
/// which only makes sense for RGB.
pub fn parse_declared(spec: &str) -> Outcome<BitRateReport> {
    let bad = || config_error(format!("bad --declare {spec:?}; expected REP=HxW[@AVG_BITS]"));
    let (rep, rest) = spec.split_once('=').ok_or_else(bad)?;
    let rep: Representation = rep.trim().parse()?;
    let (dims, avg) = match rest.split_once('@') {
        Some((d, a)) => (d, Some(a.trim().parse::<f64>().map_err(|_| bad())?)),
        None => (rest, None),
    };
    let (h, w) = dims.split_once(['x', 'X']).ok_or_else(bad)?;
    let h: u64 = h.trim().parse().map_err(|_| bad())?;
    let w: u64 = w.trim().parse().map_err(|_| bad())?;
    let depth = rep.default_bit_depth();
    let mut report = BitRateReport::dense(rep, 0, h, w, depth);
    match avg {
        Some(a) if a.is_finite() && a >= 0.0 => report.avg_sparse_bits_per_frame = a,
        Some(_) => return Err(bad()),
        None if rep == Representation::Rgb => {}
        None => return Err(config_error(format!("--declare {spec:?}: {rep} rows need @AVG_BITS"))),
    }
    Ok(report)
}

/// Pool per-sequence reports of one representation, weighting by frame count.
fn pool(reports: &[BitRateReport]) -> Outcome<BitRateReport> {
    let first = reports[0].clone();
    if let Some(other) = reports
        .iter()
        .find(|r| (r.height, r.width) != (first.height, first.width))
    {
        return Err(omsense::Error::InvalidInput(format!(
            "sequences differ in size ({}x{} vs {}x{}); measure them separately",
            first.height, first.width, other.height, other.width
        ))
        .into());
    }
    let frames: usize = reports.iter().map(|r| r.frame_count).sum();
    let bits: f64 = reports
        .iter()
        .map(|r| r.avg_sparse_bits_per_frame * r.frame_count as f64)
        .sum();
    Ok(BitRateReport {
        frame_count: frames,
        avg_sparse_bits_per_frame: bits / frames as f64,
        ..first
    })
}

pub fn collect_reports(cfg: &RunConfig) -> Outcome<Vec<BitRateReport>> {
    let mut reports = Vec::new();
    if let Some(input) = &cfg.input {
        let sensor = cfg.sensor();
        let mut per_rep: Vec<Vec<BitRateReport>> = vec![Vec::new(); 3];
        let run_cfg = RunConfig {
            mode: Mode::Both,
            ..cfg.clone()
        };
        for seq in discover(input, &cfg.pattern)? {
            eprintln!("metrics: converting {}", seq.name);
            let result = process(&seq, &run_cfg, &sensor)?;
            for (slot, r) in per_rep.iter_mut().zip(result.reports) {
                slot.push(r);
            }
        }
        for slot in &per_rep {
            reports.push(pool(slot)?);
        }
    }
    for path in &cfg.aer {
        let bytes = fs::read(path).map_err(|e| io_failure(path, e))?;
        let options = DecodeOptions {
            frame_count: None,
            frame_rate: cfg.frame_rate,
        };
        let report = match decode_aer(&bytes, &options).map_err(|e| name_source(e, path))? {
            AerSequence::Events(seq) => BitRateReport::from_sequence(Representation::Dvs, &seq, 1),
            AerSequence::Spikes(seq) => BitRateReport::from_sequence(Representation::Oms, &seq, 1),
        };
        reports.push(report.map_err(|e| name_source(e, path))?);
    }
    for spec in &cfg.declare {
        reports.push(parse_declared(spec)?);
    }
    Ok(reports)
}

fn name_source(e: omsense::Error, path: &std::path::Path) -> omsense::Error {
    match e {
        omsense::Error::Corruption { offset, message } => omsense::Error::Corruption {
            offset,
            message: format!("{}: {message}", path.display()),
        },
        omsense::Error::Format { message, .. } => omsense::Error::Format {
            source_name: path.display().to_string(),
            message,
        },
        omsense::Error::InvalidInput(m) => omsense::Error::InvalidInput(format!("{}: {m}", path.display())),
        other => other,
    }
}

/// Human-readable per-bit comparison, three significant figures.
fn summarize(rows: &[MetricsRow]) -> Vec<String> {
    let mut lines = Vec::new();
    for r in rows {
        let mut line = format!(
            "{}: {} avg bits/frame",
            r.representation,
            format_sig(r.avg_sparse_bits_per_frame, 3)
        );
        if let Some(p) = r.perf_per_bit {
            line.push_str(&format!(", perf/bit {}", format_sig(p, 3)));
        }
        lines.push(line);
    }
    let entries: Option<Vec<_>> = rows
        .iter()
        .map(|r| {
            r.f1_input
                .and_then(|f1| perf_per_bit(f1, r.avg_sparse_bits_per_frame).ok())
        })
        .collect();
    if let Some(table) = entries.and_then(|e| ratio_table(&e).ok()) {
        for i in 1..rows.len() {
            let j = i - 1;
            lines.push(format!(
                "{} vs {}: {} times the perf/bit ({}x more)",
                rows[i].representation,
                rows[j].representation,
                format_sig(table.ratio(i, j), 4),
                format_sig(table.gain(i, j), 4)
            ));
        }
    }
    lines
}

pub fn run(args: &MetricsArgs) -> Outcome {
    let cfg = args.resolve()?;
    cfg.validate()?;
    let reports = collect_reports(&cfg)?;
    let rows = metrics_rows(&reports, &cfg)?;
    if !cfg.f1.is_empty() {
        if let Some(r) = rows.iter().find(|r| r.f1_input.is_none()) {
            return Err(config_error(format!("missing F1 input for {}", r.representation)));
        }
    }
    let mut buf = Vec::new();
    write_metrics(&rows, &mut buf)?;
    for line in summarize(&rows) {
        eprintln!("metrics: {line}");
    }
    match &cfg.output {
        Some(path) => {
            fs::write(path, &buf).map_err(|e| io_failure(path, e))?;
            let mut manifest = path.clone().into_os_string();
            manifest.push(".manifest.toml");
            cfg.write_manifest(&PathBuf::from(manifest))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&buf)
                .map_err(|e| io_failure(std::path::Path::new("<stdout>"), e))
        }
    }
}
