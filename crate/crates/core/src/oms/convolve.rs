use crate::config::BoundaryMode;
use crate::error::{Error, Result};
use crate::frame::{Frame, RealFrame};

use super::kernel::DiskKernel;

/// Same-size 2D filtering with `kernel` centered on every pixel.
///
/// Disk kernels are symmetric, so correlation and convolution coincide. The frame
/// must be at least as large as the kernel in both dimensions.
pub fn convolve2d(frame: &RealFrame, kernel: &DiskKernel, boundary: BoundaryMode) -> Result<RealFrame> {
    let (h, w) = frame.shape();
    let side = kernel.side();
    if h < side || w < side {
        return Err(Error::invalid(format!(
            "{h}x{w} frame is smaller than the {side}x{side} kernel"
        )));
    }
    let taps = kernel.taps();
    let r = kernel.radius() as usize;
    let src = frame.data();
    let mut out = vec![0.0; h * w];

    let fill_row = |y: usize, row: &mut [f64]| {
        let interior_row = y >= r && y + r < h;
        for (x, cell) in row.iter_mut().enumerate() {
            *cell = if interior_row && x >= r && x + r < w {
                taps.iter()
                    .map(|&(dy, dx, wt)| {
                        let yy = (y as isize + dy) as usize;
                        let xx = (x as isize + dx) as usize;
                        wt * src[yy * w + xx]
                    })
                    .sum()
            } else {
                taps.iter()
                    .map(|&(dy, dx, wt)| wt * sample(src, h, w, y as isize + dy, x as isize + dx, boundary))
                    .sum()
            };
        }
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        out.par_chunks_mut(w).enumerate().for_each(|(y, row)| fill_row(y, row));
    }
    #[cfg(not(feature = "parallel"))]
    for (y, row) in out.chunks_mut(w).enumerate() {
        fill_row(y, row);
    }

    Ok(RealFrame::from_parts(h, w, out))
}

#[inline]
fn sample(src: &[f64], h: usize, w: usize, y: isize, x: isize, boundary: BoundaryMode) -> f64 {
    let inside = y >= 0 && x >= 0 && (y as usize) < h && (x as usize) < w;
    match boundary {
        BoundaryMode::Zero if !inside => 0.0,
        _ => {
            let yy = y.clamp(0, h as isize - 1) as usize;
            let xx = x.clamp(0, w as isize - 1) as usize;
            src[yy * w + xx]
        }
    }
}
