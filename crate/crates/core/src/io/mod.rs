//! File formats: image sequence input, AER streams and per-frame images.

pub mod aer;
mod images;
pub mod netpbm;

pub use aer::{decode_aer, decode_aer_as, encode_aer, AerFrame, AerSequence, DecodeOptions};
pub use images::{
    matching_files, read_image_sequence, read_spike_frame, write_frames, write_rgb_png, write_spike_frames, FrameImage,
    FrameImageFormat,
};
