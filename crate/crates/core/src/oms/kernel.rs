use crate::error::{Error, Result};

/// Sub-samples per cell edge used to estimate disk coverage.
pub const SUPERSAMPLE: i64 = 256;

/// Circular averaging filter: a feathered disk of weights summing to one.
///
/// Cell `(i, j)` is weighted by the fraction of the continuous disk (centered on
/// the middle cell) that overlaps its unit square. Coverage is estimated on a
/// `256 x 256` grid of sub-cell midpoints in exact integer arithmetic, which keeps
/// the kernel exactly symmetric under flips and transposition.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskKernel {
    radius: u32,
    weights: Vec<f64>,
}

impl DiskKernel {
    pub fn new(radius: u32) -> Result<Self> {
        if radius < 1 {
            return Err(Error::config("disk radius must be at least 1"));
        }
        let r = i64::from(radius);
        let side = (2 * r + 1) as usize;
        // coordinates in units of 1 / (2 * SUPERSAMPLE) pixel; sub-cell midpoints
        // sit at odd offsets -(S-1), ..., S-1 from the cell center
        let unit = 2 * SUPERSAMPLE;
        let limit = (unit * r) * (unit * r);

        let mut counts = vec![0u64; side * side];
        for (i, row) in counts.chunks_exact_mut(side).enumerate() {
            let cy = (i as i64 - r) * unit;
            for (j, cell) in row.iter_mut().enumerate() {
                let cx = (j as i64 - r) * unit;
                *cell = (0..SUPERSAMPLE)
                    .map(|k| {
                        let y = cy + 2 * k + 1 - SUPERSAMPLE;
                        let room = limit - y * y;
                        if room < 0 {
                            return 0;
                        }
                        let reach = (room as u64).isqrt() as i64;
                        midpoints_within(cx - SUPERSAMPLE + 1, cx + SUPERSAMPLE - 1, reach)
                    })
                    .sum();
            }
        }
        let total: u64 = counts.iter().sum();
        let weights = counts.into_iter().map(|c| c as f64 / total as f64).collect();
        Ok(Self { radius, weights })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius as usize + 1
    }

    /// Row-major weights, `side * side` long.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.side() + col]
    }

    pub fn center_weight(&self) -> f64 {
        let r = self.radius as usize;
        self.get(r, r)
    }

    /// Nonzero taps as `(row offset, col offset, weight)` in row-major order.
    pub(crate) fn taps(&self) -> Vec<(isize, isize, f64)> {
        let r = self.radius as isize;
        let side = self.side();
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(k, &w)| ((k / side) as isize - r, (k % side) as isize - r, w))
            .collect()
    }
}

/// Number of values `lo, lo + 2, ..., hi` with absolute value at most `reach`.
fn midpoints_within(lo: i64, hi: i64, reach: i64) -> u64 {
    let a = lo.max(-reach);
    let b = hi.min(reach);
    if a > b {
        return 0;
    }
    // first value >= a with the parity of lo
    let first = a + (a - lo).rem_euclid(2);
    if first > b {
        0
    } else {
        ((b - first) / 2 + 1) as u64
    }
}
