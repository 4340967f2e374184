//! Binary netpbm images: P4 bitmaps for spikes, P5 graymaps for events.
//!
//! P4 rows are packed MSB first and padded to a whole byte; a set bit is black.
//! P5 uses maxval 255 with events mapped `-1 -> 0`, `0 -> 128`, `+1 -> 255`.

use crate::error::{Error, Result};
use crate::frame::{EventFrame, Frame, SpikeFrame};

pub const EVENT_OFF: u8 = 0;
pub const EVENT_NONE: u8 = 128;
pub const EVENT_ON: u8 = 255;

pub fn event_to_gray(p: i8) -> u8 {
    match p {
        1 => EVENT_ON,
        -1 => EVENT_OFF,
        _ => EVENT_NONE,
    }
}

fn gray_to_event(v: u8) -> Option<i8> {
    match v {
        EVENT_ON => Some(1),
        EVENT_OFF => Some(-1),
        EVENT_NONE => Some(0),
        _ => None,
    }
}

pub fn encode_p4(frame: &SpikeFrame) -> Vec<u8> {
    let (h, w) = frame.shape();
    let mut out = format!("P4\n{w} {h}\n").into_bytes();
    let row_bytes = w.div_ceil(8);
    for y in 0..h {
        let mut row = vec![0u8; row_bytes];
        for x in 0..w {
            if frame.get(y, x) {
                row[x / 8] |= 0x80 >> (x % 8);
            }
        }
        out.extend_from_slice(&row);
    }
    out
}

pub fn encode_p5(frame: &EventFrame) -> Vec<u8> {
    let (h, w) = frame.shape();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(frame.data().iter().map(|&p| event_to_gray(p)));
    out
}

/// Parsed netpbm header plus the byte offset where the raster starts.
struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: Option<u32>,
    raster_start: usize,
}

fn parse_header(bytes: &[u8], name: &str) -> Result<Header> {
    let err = |message: &str| Error::Format {
        source_name: name.to_string(),
        message: message.to_string(),
    };
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(err("not a netpbm file"));
    }
    let magic = [bytes[0], bytes[1]];
    let fields = match magic[1] {
        b'4' => 2,
        b'5' => 3,
        _ => return Err(err("only P4 and P5 are supported")),
    };
    let mut pos = 2;
    let mut values = Vec::with_capacity(fields);
    while values.len() < fields {
        // whitespace and comments between tokens
        loop {
            match bytes.get(pos) {
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(err("header truncated")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        let token = std::str::from_utf8(&bytes[start..pos]).map_err(|_| err("bad header"))?;
        let v: u32 = token.parse().map_err(|_| err("bad header number"))?;
        values.push(v);
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(err("missing whitespace before raster"));
    }
    Ok(Header {
        magic,
        width: values[0] as usize,
        height: values[1] as usize,
        maxval: values.get(2).copied(),
        raster_start: pos + 1,
    })
}

pub fn decode_p4(bytes: &[u8], name: &str, frame_index: u32) -> Result<SpikeFrame> {
    let header = parse_header(bytes, name)?;
    if header.magic != *b"P4" {
        return Err(Error::Format {
            source_name: name.into(),
            message: "expected a P4 bitmap".into(),
        });
    }
    let (h, w) = (header.height, header.width);
    let row_bytes = w.div_ceil(8);
    let raster = &bytes[header.raster_start..];
    if raster.len() < row_bytes * h {
        return Err(Error::Format {
            source_name: name.into(),
            message: format!("raster has {} bytes, expected {}", raster.len(), row_bytes * h),
        });
    }
    let data = (0..h * w)
        .map(|i| {
            let (y, x) = (i / w, i % w);
            raster[y * row_bytes + x / 8] & (0x80 >> (x % 8)) != 0
        })
        .collect();
    SpikeFrame::new(h, w, data, frame_index)
}

pub fn decode_p5(bytes: &[u8], name: &str) -> Result<(usize, usize, Vec<u8>)> {
    let header = parse_header(bytes, name)?;
    let fmt = |message: String| Error::Format {
        source_name: name.into(),
        message,
    };
    if header.magic != *b"P5" {
        return Err(fmt("expected a P5 graymap".into()));
    }
    if header.maxval != Some(255) {
        return Err(fmt(format!("maxval {:?} is not 255", header.maxval)));
    }
    let n = header.height * header.width;
    let raster = &bytes[header.raster_start..];
    if raster.len() < n {
        return Err(fmt(format!("raster has {} bytes, expected {n}", raster.len())));
    }
    Ok((header.height, header.width, raster[..n].to_vec()))
}

pub fn decode_event_p5(bytes: &[u8], name: &str, frame_index: u32) -> Result<EventFrame> {
    let (h, w, gray) = decode_p5(bytes, name)?;
    let data = gray
        .iter()
        .map(|&v| {
            gray_to_event(v).ok_or_else(|| Error::Format {
                source_name: name.into(),
                message: format!("gray level {v} is not an event level"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EventFrame::new(h, w, data, frame_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silent_spike_frame_is_white() {
        let bytes = encode_p4(&SpikeFrame::empty(2, 10, 0).unwrap());
        assert_eq!(&bytes[..8], b"P4\n10 2\n");
        assert_eq!(&bytes[8..], &[0, 0, 0, 0]);
    }

    #[test]
    fn p4_bits_are_msb_first() {
        let mut d = vec![false; 9];
        d[0] = true;
        d[8] = true;
        let f = SpikeFrame::new(1, 9, d, 0).unwrap();
        let bytes = encode_p4(&f);
        assert_eq!(&bytes[bytes.len() - 2..], &[0x80, 0x80]);
        assert_eq!(decode_p4(&bytes, "t", 0).unwrap(), f);
    }

    #[test]
    fn single_on_event_is_one_white_pixel() {
        let f = EventFrame::new(2, 2, vec![0, 1, 0, -1], 4).unwrap();
        let bytes = encode_p5(&f);
        assert_eq!(&bytes[..11], b"P5\n2 2\n255\n");
        assert_eq!(&bytes[11..], &[128, 255, 128, 0]);
        assert_eq!(decode_event_p5(&bytes, "t", 4).unwrap(), f);
    }

    #[test]
    fn comments_in_header() {
        let bytes = b"P5\n# made by hand\n2 1\n255\n\x80\xff";
        assert_eq!(decode_p5(bytes, "t").unwrap(), (1, 2, vec![128, 255]));
    }

    #[test]
    fn malformed_headers() {
        assert!(decode_p4(b"P6\n1 1\n255\n", "t", 0).is_err());
        assert!(decode_p4(b"P4\n8 2\n\x00", "t", 0).is_err());
        assert!(decode_p5(b"P5\n1 1\n15\n\x00", "t").is_err());
        assert!(decode_event_p5(b"P5\n1 1\n255\n\x07", "t", 0).is_err());
        assert!(decode_p5(b"P5\n1", "t").is_err());
    }
}
