//! Histogram of oriented gradients on a fixed 128×128 grid.

use super::RasterImage;
use crate::error::Result;

const SIDE: usize = 128;
const CELL: usize = 8;
const BINS: usize = 9;
const CELLS: usize = SIDE / CELL;
const BLOCKS: usize = CELLS - 1;
const BLOCK_STRIDE: usize = 2;
const KEPT: usize = BLOCKS / BLOCK_STRIDE;
const CLIP: f64 = 0.2;
const EPS: f64 = 1e-6;

/// Descriptor length: 7×7 retained blocks of 2×2 cells with 9 bins.
pub const HOG_LEN: usize = KEPT * KEPT * 4 * BINS;

fn l2_hys(v: &mut [f64]) {
    let norm = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() + EPS * EPS).sqrt();
    let n = norm(v);
    v.iter_mut().for_each(|x| *x = (*x / n).min(CLIP));
    let n = norm(v);
    v.iter_mut().for_each(|x| *x /= n);
}

/// HOG with unsigned orientations interpolated between bins centred at
/// 0°, 20°, …, 160°, L2-Hys block normalization, keeping every second
/// block in each direction.
pub fn hog_features(img: &RasterImage) -> Result<Vec<f64>> {
    let g = img.gray().resize(SIDE, SIDE);
    let mut cells = vec![[0.0f64; BINS]; CELLS * CELLS];
    for y in 0..SIDE as isize {
        for x in 0..SIDE as isize {
            let gx = g.clamped(x + 1, y) - g.clamped(x - 1, y);
            let gy = g.clamped(x, y + 1) - g.clamped(x, y - 1);
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            let theta = gy.atan2(gx).to_degrees().rem_euclid(180.0);
            let pos = theta / 20.0;
            let lo = pos.floor();
            let frac = pos - lo;
            let b0 = lo as usize % BINS;
            let b1 = (b0 + 1) % BINS;
            let cell = &mut cells[(y as usize / CELL) * CELLS + x as usize / CELL];
            cell[b0] += mag * (1.0 - frac);
            cell[b1] += mag * frac;
        }
    }

    let mut out = Vec::with_capacity(HOG_LEN);
    for by in (0..BLOCKS).step_by(BLOCK_STRIDE).take(KEPT) {
        for bx in (0..BLOCKS).step_by(BLOCK_STRIDE).take(KEPT) {
            let mut block = Vec::with_capacity(4 * BINS);
            for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                block.extend_from_slice(&cells[(by + dy) * CELLS + bx + dx]);
            }
            l2_hys(&mut block);
            out.extend(block);
        }
    }
    Ok(out)
}
