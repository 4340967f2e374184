//! Test-only oracles, written independently of the library's code paths.

#![allow(dead_code)]

use omsense::{BoundaryMode, DiskKernel, Frame, RealFrame};

/// Fraction of the radius-`r` disk's area that falls in kernel cell `(row, col)`,
/// by midpoint integration of exact vertical chord lengths across the cell.
pub fn disk_cell_area_fraction(r: u32, row: usize, col: usize) -> f64 {
    const STEPS: usize = 4000;
    let r = f64::from(r);
    let x0 = col as f64 - r - 0.5;
    let y0 = row as f64 - r - 0.5;
    let (y1, dx) = (y0 + 1.0, 1.0 / STEPS as f64);
    let mut area = 0.0;
    for k in 0..STEPS {
        let x = x0 + (k as f64 + 0.5) * dx;
        if x.abs() >= r {
            continue;
        }
        let half = (r * r - x * x).sqrt();
        let chord = y1.min(half) - y0.max(-half);
        if chord > 0.0 {
            area += chord * dx;
        }
    }
    area / (std::f64::consts::PI * r * r)
}

/// Direct quadruple loop over output pixels and kernel cells.
pub fn naive_convolve(frame: &RealFrame, kernel: &DiskKernel, mode: BoundaryMode) -> Vec<f64> {
    let (h, w) = frame.shape();
    let side = kernel.side() as isize;
    let r = kernel.radius() as isize;
    let mut out = vec![0.0; h * w];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for i in 0..side {
                for j in 0..side {
                    let (yy, xx) = (y + i - r, x + j - r);
                    let inside = yy >= 0 && xx >= 0 && yy < h as isize && xx < w as isize;
                    let v = match (mode, inside) {
                        (_, true) => frame.get(yy as usize, xx as usize),
                        (BoundaryMode::Zero, false) => 0.0,
                        (BoundaryMode::Replicate, false) => frame.get(
                            yy.clamp(0, h as isize - 1) as usize,
                            xx.clamp(0, w as isize - 1) as usize,
                        ),
                    };
                    acc += kernel.get(i as usize, j as usize) * v;
                }
            }
            out[(y as usize) * w + x as usize] = acc;
        }
    }
    out
}
