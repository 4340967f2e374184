use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::{GrayImage, ImageFormat, RgbImage};

use crate::error::{Error, Result};
use crate::frame::{EventFrame, Frame, FrameSequence, RgbFrame, SpikeFrame};

use super::netpbm;

/// Load every file in `dir` whose name matches `pattern`, in lexicographic order.
///
/// PNG and binary PPM/PGM are decoded; grayscale inputs are expanded to RGB.
pub fn read_image_sequence(dir: &Path, pattern: &str, frame_rate: f64) -> Result<FrameSequence<RgbFrame>> {
    let paths = matching_files(dir, pattern)?;
    let mut frames = Vec::with_capacity(paths.len());
    for path in &paths {
        let frame = read_rgb(path)?;
        if let Some(first) = frames.first() {
            let first: &RgbFrame = first;
            if first.shape() != frame.shape() {
                return Err(Error::invalid(format!(
                    "{} is {}x{} but earlier frames are {}x{}",
                    path.display(),
                    frame.height(),
                    frame.width(),
                    first.height(),
                    first.width()
                )));
            }
        }
        frames.push(frame);
    }
    FrameSequence::new(frames, frame_rate)
}

/// Files (not directories) in `dir` matching the glob `pattern`, sorted by name.
pub fn matching_files(dir: &Path, pattern: &str) -> Result<Vec<PathBuf>> {
    let matcher =
        glob::Pattern::new(pattern).map_err(|e| Error::config(format!("bad file pattern {pattern:?}: {e}")))?;
    let entries = fs::read_dir(dir).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(format!("directory {}", dir.display())),
        _ => Error::io(dir, e),
    })?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let name_matches = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| matcher.matches(n));
        if name_matches && path.is_file() {
            paths.push(path);
        }
    }
    if paths.is_empty() {
        return Err(Error::NotFound(format!(
            "no files matching {pattern:?} in {}",
            dir.display()
        )));
    }
    paths.sort();
    Ok(paths)
}

fn read_rgb(path: &Path) -> Result<RgbFrame> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format {
            source_name: path.display().to_string(),
            message: other.to_string(),
        },
    })?;
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    RgbFrame::new(h as usize, w as usize, 3, rgb.into_raw())
}

/// Write an RGB frame as PNG.
pub fn write_rgb_png(frame: &RgbFrame, path: &Path) -> Result<()> {
    let img = RgbImage::from_raw(frame.width() as u32, frame.height() as u32, frame.data().to_vec())
        .expect("frame length checked at construction");
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|e| image_err(path, e))
}

fn image_err(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format {
            source_name: path.display().to_string(),
            message: other.to_string(),
        },
    }
}

/// On-disk format for per-frame images.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameImageFormat {
    /// P4 for spike frames, P5 for event frames.
    Netpbm,
    Png,
}

impl FromStr for FrameImageFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pgm" | "pbm" | "netpbm" => Ok(FrameImageFormat::Netpbm),
            "png" => Ok(FrameImageFormat::Png),
            other => Err(Error::config(format!("unknown image format {other:?}"))),
        }
    }
}

impl fmt::Display for FrameImageFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameImageFormat::Netpbm => "pgm",
            FrameImageFormat::Png => "png",
        })
    }
}

/// Frames with a fixed grayscale rendering.
pub trait FrameImage: Frame {
    const NETPBM_EXTENSION: &'static str;

    fn to_netpbm(&self) -> Vec<u8>;

    /// One gray level per pixel, as stored in PNG output.
    fn gray_levels(&self) -> Vec<u8>;
}

impl FrameImage for SpikeFrame {
    const NETPBM_EXTENSION: &'static str = "pbm";

    fn to_netpbm(&self) -> Vec<u8> {
        netpbm::encode_p4(self)
    }

    fn gray_levels(&self) -> Vec<u8> {
        self.data().iter().map(|&s| if s { 0 } else { 255 }).collect()
    }
}

impl FrameImage for EventFrame {
    const NETPBM_EXTENSION: &'static str = "pgm";

    fn to_netpbm(&self) -> Vec<u8> {
        netpbm::encode_p5(self)
    }

    fn gray_levels(&self) -> Vec<u8> {
        self.data().iter().map(|&p| netpbm::event_to_gray(p)).collect()
    }
}

/// Write one image per frame as `<prefix><index:06>.<ext>` in `dir`, creating it if needed.
pub fn write_frames<F: FrameImage>(
    seq: &FrameSequence<F>,
    dir: &Path,
    format: FrameImageFormat,
    prefix: &str,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(seq.len());
    for (position, frame) in seq.frames().iter().enumerate() {
        let index = frame.frame_index().unwrap_or(position as u32);
        let ext = match format {
            FrameImageFormat::Netpbm => F::NETPBM_EXTENSION,
            FrameImageFormat::Png => "png",
        };
        let path = dir.join(format!("{prefix}{index:06}.{ext}"));
        match format {
            FrameImageFormat::Netpbm => {
                fs::write(&path, frame.to_netpbm()).map_err(|e| Error::io(&path, e))?;
            }
            FrameImageFormat::Png => {
                let img = GrayImage::from_raw(frame.width() as u32, frame.height() as u32, frame.gray_levels())
                    .expect("one gray level per pixel");
                img.save_with_format(&path, ImageFormat::Png)
                    .map_err(|e| image_err(&path, e))?;
            }
        }
        written.push(path);
    }
    Ok(written)
}

/// [`write_frames`] for OMS output.
pub fn write_spike_frames(
    seq: &FrameSequence<SpikeFrame>,
    dir: &Path,
    format: FrameImageFormat,
) -> Result<Vec<PathBuf>> {
    write_frames(seq, dir, format, "oms_")
}

/// Read back a spike frame written as P4 or PNG.
pub fn read_spike_frame(path: &Path, frame_index: u32) -> Result<SpikeFrame> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P4") {
        return netpbm::decode_p4(&bytes, &path.display().to_string(), frame_index);
    }
    let img = image::load_from_memory(&bytes)
        .map_err(|e| image_err(path, e))?
        .to_luma8();
    let (w, h) = img.dimensions();
    let data = img.into_raw().into_iter().map(|v| v < 128).collect();
    SpikeFrame::new(h as usize, w as usize, data, frame_index)
}
