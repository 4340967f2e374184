//! Bandwidth accounting for dense and event-based representations.
//!
//! Two counting rules are kept side by side. The dense rate `h * w * bit_depth`
//! charges every pixel every frame. The sparse rate charges only active pixels
//! (nonzero events, true spikes), which is what matters for event streams.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{ActivityFrame, Frame, FrameSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Rgb,
    Dvs,
    Oms,
}

impl Representation {
    pub const ALL: [Representation; 3] = [Representation::Rgb, Representation::Dvs, Representation::Oms];

    pub fn as_str(self) -> &'static str {
        match self {
            Representation::Rgb => "rgb",
            Representation::Dvs => "dvs",
            Representation::Oms => "oms",
        }
    }

    /// Bits per pixel used when a representation is transmitted.
    pub fn default_bit_depth(self) -> u32 {
        match self {
            Representation::Rgb => 24,
            Representation::Dvs | Representation::Oms => 1,
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rgb" => Ok(Representation::Rgb),
            "dvs" => Ok(Representation::Dvs),
            "oms" => Ok(Representation::Oms),
            other => Err(Error::config(format!("unknown representation {other:?}"))),
        }
    }
}

/// Bits per frame when every pixel is sent: `height * width * bit_depth`.
pub fn dense_bit_rate(height: u64, width: u64, bit_depth: u32) -> u64 {
    height * width * u64::from(bit_depth)
}

/// Bits for one frame when only active pixels are sent.
pub fn sparse_bit_rate<F: ActivityFrame>(frame: &F, bit_depth: u32) -> u64 {
    frame.active_count() as u64 * u64::from(bit_depth)
}

/// Mean sparse bits per frame, summed in frame order.
pub fn avg_bit_rate<F: ActivityFrame>(seq: &FrameSequence<F>, bit_depth: u32) -> Result<f64> {
    if seq.is_empty() {
        return Err(Error::invalid("average bit rate of an empty sequence"));
    }
    let total: u64 = seq.frames().iter().map(|f| sparse_bit_rate(f, bit_depth)).sum();
    Ok(total as f64 / seq.len() as f64)
}

/// Bit-rate summary for one representation of one sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct BitRateReport {
    pub representation: Representation,
    pub frame_count: usize,
    pub height: u64,
    pub width: u64,
    pub bit_depth: u32,
    pub dense_bits_per_frame: u64,
    pub avg_sparse_bits_per_frame: f64,
}

impl BitRateReport {
    pub fn from_sequence<F: ActivityFrame>(
        representation: Representation,
        seq: &FrameSequence<F>,
        bit_depth: u32,
    ) -> Result<Self> {
        let (h, w) = seq.require_nonempty("bit-rate report")?;
        Ok(Self {
            representation,
            frame_count: seq.len(),
            height: h as u64,
            width: w as u64,
            bit_depth,
            dense_bits_per_frame: dense_bit_rate(h as u64, w as u64, bit_depth),
            avg_sparse_bits_per_frame: avg_bit_rate(seq, bit_depth)?,
        })
    }

    /// A dense representation: every pixel is active in every frame.
    pub fn dense(representation: Representation, frame_count: usize, height: u64, width: u64, bit_depth: u32) -> Self {
        let dense = dense_bit_rate(height, width, bit_depth);
        Self {
            representation,
            frame_count,
            height,
            width,
            bit_depth,
            dense_bits_per_frame: dense,
            avg_sparse_bits_per_frame: dense as f64,
        }
    }

    pub fn dense_of<F: Frame>(representation: Representation, seq: &FrameSequence<F>, bit_depth: u32) -> Result<Self> {
        let (h, w) = seq.require_nonempty("bit-rate report")?;
        Ok(Self::dense(representation, seq.len(), h as u64, w as u64, bit_depth))
    }
}

/// F1 score normalized by bits per frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerfPerBit {
    pub f1: f64,
    pub avg_bits_per_frame: f64,
    pub ratio: f64,
}

pub fn perf_per_bit(f1: f64, avg_bits: f64) -> Result<PerfPerBit> {
    if !(avg_bits.is_finite() && avg_bits > 0.0) {
        return Err(Error::invalid(format!(
            "average bits per frame must be positive, got {avg_bits}"
        )));
    }
    if !(0.0..=1.0).contains(&f1) {
        return Err(Error::invalid(format!("F1 score must lie in [0, 1], got {f1}")));
    }
    Ok(PerfPerBit {
        f1,
        avg_bits_per_frame: avg_bits,
        ratio: f1 / avg_bits,
    })
}

/// Pairwise `ratio[i] / ratio[j]` over a set of per-bit scores.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioTable {
    values: Vec<Vec<f64>>,
}

impl RatioTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// How many times more score per bit entry `i` carries than entry `j`.
    pub fn ratio(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Relative gain `ratio - 1`, i.e. "N times more" in the additive sense.
    pub fn gain(&self, i: usize, j: usize) -> f64 {
        self.values[i][j] - 1.0
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }
}

pub fn ratio_table(entries: &[PerfPerBit]) -> Result<RatioTable> {
    if entries.len() < 2 {
        return Err(Error::invalid("ratio table needs at least two entries"));
    }
    if let Some(bad) = entries.iter().find(|e| !(e.ratio.is_finite() && e.ratio > 0.0)) {
        return Err(Error::invalid(format!(
            "per-bit score must be positive, got {}",
            bad.ratio
        )));
    }
    let values = entries
        .iter()
        .map(|a| entries.iter().map(|b| a.ratio / b.ratio).collect())
        .collect();
    Ok(RatioTable { values })
}

/// Round to `digits` significant figures for display.
pub fn format_sig(value: f64, digits: usize) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    format!("{:.*e}", digits.saturating_sub(1), value)
}

/// One CSV row of the metrics report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub representation: Representation,
    pub frames: usize,
    pub height: u64,
    pub width: u64,
    pub bit_depth: u32,
    pub dense_bits_per_frame: u64,
    pub avg_sparse_bits_per_frame: f64,
    pub f1_input: Option<f64>,
    pub perf_per_bit: Option<f64>,
}

pub const CSV_HEADER: [&str; 9] = [
    "representation",
    "frames",
    "height",
    "width",
    "bit_depth",
    "dense_bits_per_frame",
    "avg_sparse_bits_per_frame",
    "f1_input",
    "perf_per_bit",
];

impl MetricsRow {
    /// Per-bit score uses the sparse rate, which equals the dense rate for dense rows.
    pub fn new(report: &BitRateReport, f1: Option<f64>) -> Result<Self> {
        let perf = match f1 {
            Some(f1) => Some(perf_per_bit(f1, report.avg_sparse_bits_per_frame)?.ratio),
            None => None,
        };
        Ok(Self {
            representation: report.representation,
            frames: report.frame_count,
            height: report.height,
            width: report.width,
            bit_depth: report.bit_depth,
            dense_bits_per_frame: report.dense_bits_per_frame,
            avg_sparse_bits_per_frame: report.avg_sparse_bits_per_frame,
            f1_input: f1,
            perf_per_bit: perf,
        })
    }
}

pub fn write_csv<W: Write>(rows: &[MetricsRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Like [`write_csv`] with extra `ratio_vs_<rep>` columns. Every row needs an F1 input.
pub fn write_csv_with_ratios<W: Write>(rows: &[MetricsRow], out: W) -> Result<()> {
    let entries = rows
        .iter()
        .map(|r| {
            let f1 = r
                .f1_input
                .ok_or_else(|| Error::config(format!("missing F1 input for {}", r.representation)))?;
            perf_per_bit(f1, r.avg_sparse_bits_per_frame)
        })
        .collect::<Result<Vec<_>>>()?;
    let table = ratio_table(&entries)?;

    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let mut header: Vec<String> = CSV_HEADER.iter().map(|s| s.to_string()).collect();
    header.extend(rows.iter().map(|r| format!("ratio_vs_{}", r.representation)));
    w.write_record(&header)?;
    for (i, row) in rows.iter().enumerate() {
        let mut record = vec![
            row.representation.to_string(),
            row.frames.to_string(),
            row.height.to_string(),
            row.width.to_string(),
            row.bit_depth.to_string(),
            row.dense_bits_per_frame.to_string(),
            row.avg_sparse_bits_per_frame.to_string(),
            opt(row.f1_input),
            opt(row.perf_per_bit),
        ];
        record.extend((0..rows.len()).map(|j| table.ratio(i, j).to_string()));
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Parse the nine-column report. Extra ratio columns are ignored.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<MetricsRow>> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let header = r.headers()?.clone();
    if header.len() < CSV_HEADER.len() || header.iter().zip(CSV_HEADER).any(|(a, b)| a != b) {
        return Err(Error::Format {
            source_name: "metrics csv".into(),
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let trimmed: csv::StringRecord = record.iter().take(CSV_HEADER.len()).collect();
        rows.push(trimmed.deserialize(Some(&csv::StringRecord::from(CSV_HEADER.to_vec())))?);
    }
    Ok(rows)
}
