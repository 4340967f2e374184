//! Address-event binary stream.
//!
//! Layout, all integers little-endian with no padding:
//!
//! ```text
//! header (12 bytes): magic "AER1" | version u16 | height u16 | width u16 | flags u16
//! record  (9 bytes): x u16 | y u16 | frame_index u32 | polarity i8
//! ```
//!
//! Flag bit 0 marks a signed DVS stream; without it every record is a spike with
//! polarity +1. Records are strictly increasing in `(frame_index, y, x)`.

use byteorder::{ByteOrder, LittleEndian};

use crate::error::{Error, Result};
use crate::frame::{EventFrame, Frame, FrameSequence, SpikeFrame};

pub const MAGIC: [u8; 4] = *b"AER1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 12;
pub const RECORD_LEN: usize = 9;
pub const FLAG_POLARITY: u16 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AerHeader {
    pub version: u16,
    pub height: u16,
    pub width: u16,
    pub flags: u16,
}

impl AerHeader {
    pub fn has_polarity(&self) -> bool {
        self.flags & FLAG_POLARITY != 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AerRecord {
    pub frame_index: u32,
    pub y: u16,
    pub x: u16,
    pub polarity: i8,
}

/// Frames that can be written as address events.
pub trait AerFrame: Frame + Sized {
    /// Whether the stream carries signed polarity (sets flag bit 0).
    const SIGNED: bool;

    /// Polarity of pixel `index`, 0 when silent.
    fn polarity_at(&self, index: usize) -> i8;

    fn from_records(height: usize, width: usize, frame_index: u32, records: &[AerRecord]) -> Result<Self>;
}

impl AerFrame for EventFrame {
    const SIGNED: bool = true;

    fn polarity_at(&self, index: usize) -> i8 {
        self.data()[index]
    }

    fn from_records(height: usize, width: usize, frame_index: u32, records: &[AerRecord]) -> Result<Self> {
        let mut data = vec![0i8; height * width];
        for r in records {
            data[r.y as usize * width + r.x as usize] = r.polarity;
        }
        EventFrame::new(height, width, data, frame_index)
    }
}

impl AerFrame for SpikeFrame {
    const SIGNED: bool = false;

    fn polarity_at(&self, index: usize) -> i8 {
        i8::from(self.data()[index])
    }

    fn from_records(height: usize, width: usize, frame_index: u32, records: &[AerRecord]) -> Result<Self> {
        let mut data = vec![false; height * width];
        for r in records {
            data[r.y as usize * width + r.x as usize] = true;
        }
        SpikeFrame::new(height, width, data, frame_index)
    }
}

/// Serialize every active pixel of `seq` as one record.
pub fn encode_aer<F: AerFrame>(seq: &FrameSequence<F>) -> Result<Vec<u8>> {
    let (h, w) = seq.require_nonempty("aer encode")?;
    let height = u16::try_from(h).map_err(|_| Error::Capacity(format!("height {h} exceeds 65535")))?;
    let width = u16::try_from(w).map_err(|_| Error::Capacity(format!("width {w} exceeds 65535")))?;
    let flags = if F::SIGNED { FLAG_POLARITY } else { 0 };

    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(&MAGIC);
    for v in [VERSION, height, width, flags] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut record = [0u8; RECORD_LEN];
    for (position, frame) in seq.frames().iter().enumerate() {
        let t = frame.frame_index().unwrap_or(position as u32);
        for y in 0..h {
            for x in 0..w {
                let p = frame.polarity_at(y * w + x);
                if p == 0 {
                    continue;
                }
                LittleEndian::write_u16(&mut record[0..2], x as u16);
                LittleEndian::write_u16(&mut record[2..4], y as u16);
                LittleEndian::write_u32(&mut record[4..8], t);
                record[8] = p as u8;
                out.extend_from_slice(&record);
            }
        }
    }
    Ok(out)
}

/// Parse and check the header and every record without materializing frames.
pub fn parse_aer(bytes: &[u8]) -> Result<(AerHeader, Vec<AerRecord>)> {
    let format_err = |message: String| Error::Format {
        source_name: "aer stream".into(),
        message,
    };
    let magic_len = bytes.len().min(MAGIC.len());
    if bytes[..magic_len] != MAGIC[..magic_len] || bytes.is_empty() {
        return Err(format_err("bad magic, expected \"AER1\"".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Corruption {
            offset: bytes.len(),
            message: format!("header truncated after {} of {HEADER_LEN} bytes", bytes.len()),
        });
    }
    let header = AerHeader {
        version: LittleEndian::read_u16(&bytes[4..6]),
        height: LittleEndian::read_u16(&bytes[6..8]),
        width: LittleEndian::read_u16(&bytes[8..10]),
        flags: LittleEndian::read_u16(&bytes[10..12]),
    };
    if header.version != VERSION {
        return Err(format_err(format!("unsupported version {}", header.version)));
    }
    if header.height == 0 || header.width == 0 {
        return Err(Error::Corruption {
            offset: 6,
            message: "zero frame dimension".into(),
        });
    }

    let body = &bytes[HEADER_LEN..];
    let whole = body.len() / RECORD_LEN * RECORD_LEN;
    if whole != body.len() {
        return Err(Error::Corruption {
            offset: HEADER_LEN + whole,
            message: format!("truncated record: {} of {RECORD_LEN} bytes", body.len() - whole),
        });
    }
    let mut records = Vec::with_capacity(body.len() / RECORD_LEN);
    let mut previous: Option<(u32, u16, u16)> = None;
    for (k, chunk) in body.chunks_exact(RECORD_LEN).enumerate() {
        let offset = HEADER_LEN + k * RECORD_LEN;
        let r = AerRecord {
            x: LittleEndian::read_u16(&chunk[0..2]),
            y: LittleEndian::read_u16(&chunk[2..4]),
            frame_index: LittleEndian::read_u32(&chunk[4..8]),
            polarity: chunk[8] as i8,
        };
        let corrupt = |message: String| Error::Corruption { offset, message };
        if r.x >= header.width || r.y >= header.height {
            return Err(corrupt(format!(
                "address ({}, {}) outside {}x{} frame",
                r.x, r.y, header.width, header.height
            )));
        }
        let polarity_ok = if header.has_polarity() {
            r.polarity == 1 || r.polarity == -1
        } else {
            r.polarity == 1
        };
        if !polarity_ok {
            return Err(corrupt(format!("invalid polarity {}", r.polarity)));
        }
        let key = (r.frame_index, r.y, r.x);
        if previous.is_some_and(|p| p >= key) {
            return Err(corrupt("records out of order or duplicated".into()));
        }
        previous = Some(key);
        records.push(r);
    }
    Ok((header, records))
}

/// Options for materializing decoded frames.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecodeOptions {
    /// Number of frames to produce; defaults to one past the last frame index seen.
    pub frame_count: Option<usize>,
    pub frame_rate: f64,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            frame_count: None,
            frame_rate: crate::synth::SCENE_FRAME_RATE,
        }
    }
}

/// A decoded stream, typed by its polarity flag.
#[derive(Clone, Debug, PartialEq)]
pub enum AerSequence {
    Events(FrameSequence<EventFrame>),
    Spikes(FrameSequence<SpikeFrame>),
}

impl AerSequence {
    pub fn len(&self) -> usize {
        match self {
            AerSequence::Events(s) => s.len(),
            AerSequence::Spikes(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn decode_aer(bytes: &[u8], options: &DecodeOptions) -> Result<AerSequence> {
    let (header, records) = parse_aer(bytes)?;
    Ok(if header.has_polarity() {
        AerSequence::Events(materialize(&header, &records, options)?)
    } else {
        AerSequence::Spikes(materialize(&header, &records, options)?)
    })
}

/// Decode into a specific frame type; fails if the stream's polarity flag disagrees.
pub fn decode_aer_as<F: AerFrame>(bytes: &[u8], options: &DecodeOptions) -> Result<FrameSequence<F>> {
    let (header, records) = parse_aer(bytes)?;
    if header.has_polarity() != F::SIGNED {
        return Err(Error::Format {
            source_name: "aer stream".into(),
            message: format!(
                "stream is {}, expected {}",
                if header.has_polarity() {
                    "signed events"
                } else {
                    "spikes"
                },
                if F::SIGNED { "signed events" } else { "spikes" }
            ),
        });
    }
    materialize(&header, &records, options)
}

fn materialize<F: AerFrame>(
    header: &AerHeader,
    records: &[AerRecord],
    options: &DecodeOptions,
) -> Result<FrameSequence<F>> {
    let seen = records.last().map_or(0, |r| r.frame_index as usize + 1);
    let count = match options.frame_count {
        Some(n) if n < seen => {
            return Err(Error::invalid(format!(
                "declared {n} frames but the stream has events in frame {}",
                seen - 1
            )))
        }
        Some(n) => n,
        None => seen,
    };
    let (h, w) = (header.height as usize, header.width as usize);
    let mut frames = Vec::with_capacity(count);
    let mut rest = records;
    for t in 0..count {
        let n = rest.iter().take_while(|r| r.frame_index as usize == t).count();
        let (now, later) = rest.split_at(n);
        frames.push(F::from_records(h, w, t as u32, now)?);
        rest = later;
    }
    FrameSequence::new(frames, options.frame_rate)
}
