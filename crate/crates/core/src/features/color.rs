//! Color descriptors: HSV moments, autocorrelogram, histogram, arousal.

use super::{luminance, RasterImage};
use crate::error::Result;

/// Chebyshev ring radii of the autocorrelogram.
pub const CORRELOGRAM_DISTANCES: [usize; 4] = [1, 3, 5, 7];
const BINS_PER_CHANNEL: usize = 4;
const AROUSAL_BRIGHTNESS: f64 = -0.31;
const AROUSAL_SATURATION: f64 = 0.60;

/// `(h, s, v)` with hue scaled to `[0, 1)`.
pub fn rgb_to_hsv(r: f64, g: f64, b: f64) -> [f64; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta == 0.0 {
        return [0.0, s, max];
    }
    let sector = if max == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let h = sector / 6.0;
    [if h >= 1.0 { 0.0 } else { h }, s, max]
}

fn quantized_color(p: [f64; 3]) -> usize {
    let q = |c: f64| ((c * BINS_PER_CHANNEL as f64).floor() as usize).min(BINS_PER_CHANNEL - 1);
    q(p[0]) * BINS_PER_CHANNEL * BINS_PER_CHANNEL + q(p[1]) * BINS_PER_CHANNEL + q(p[2])
}

fn quantized_map(img: &RasterImage) -> Vec<usize> {
    let mut out = Vec::with_capacity(img.width() * img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            out.push(quantized_color(img.rgb(x, y)));
        }
    }
    out
}

/// Mean, population standard deviation and signed cube root of the third
/// central moment for H, S and V.
pub fn color_moments_hsv(img: &RasterImage) -> Result<Vec<f64>> {
    img.require_rgb("HSV color moments")?;
    let n = (img.width() * img.height()) as f64;
    let hsv: Vec<[f64; 3]> = img.pixels().chunks_exact(3).map(|p| rgb_to_hsv(p[0], p[1], p[2])).collect();
    let mut out = Vec::with_capacity(9);
    for c in 0..3 {
        let first = hsv[0][c];
        if hsv.iter().all(|p| p[c] == first) {
            out.extend_from_slice(&[first, 0.0, 0.0]);
            continue;
        }
        let mean = hsv.iter().map(|p| p[c]).sum::<f64>() / n;
        let var = hsv.iter().map(|p| (p[c] - mean).powi(2)).sum::<f64>() / n;
        let third = hsv.iter().map(|p| (p[c] - mean).powi(3)).sum::<f64>() / n;
        out.extend_from_slice(&[mean, var.sqrt(), third.cbrt()]);
    }
    Ok(out)
}

/// Autocorrelogram over 64 quantized colors: entry `d * 64 + c` is the
/// probability that a pixel on the full Chebyshev ring of radius
/// `CORRELOGRAM_DISTANCES[d]` around a pixel of color `c` also has color `c`.
/// Colors absent from the image get 0.
pub fn color_correlogram(img: &RasterImage) -> Result<Vec<f64>> {
    let (w, h) = (img.width() as isize, img.height() as isize);
    let q = quantized_map(img);
    let ncolors = BINS_PER_CHANNEL.pow(3);
    let mut out = vec![0.0; ncolors * CORRELOGRAM_DISTANCES.len()];
    for (di, &d) in CORRELOGRAM_DISTANCES.iter().enumerate() {
        let d = d as isize;
        let mut same = vec![0u64; ncolors];
        let mut total = vec![0u64; ncolors];
        for y in 0..h {
            for x in 0..w {
                let c = q[(y * w + x) as usize];
                for dy in -d..=d {
                    let ny = y + dy;
                    if ny < 0 || ny >= h {
                        continue;
                    }
                    // interior rows of the ring contribute only their two ends
                    let step = if dy.abs() == d { 1 } else { 2 * d };
                    let mut dx = -d;
                    while dx <= d {
                        let nx = x + dx;
                        if nx >= 0 && nx < w {
                            total[c] += 1;
                            if q[(ny * w + nx) as usize] == c {
                                same[c] += 1;
                            }
                        }
                        dx += step;
                    }
                }
            }
        }
        for c in 0..ncolors {
            if total[c] > 0 {
                out[di * ncolors + c] = same[c] as f64 / total[c] as f64;
            }
        }
    }
    Ok(out)
}

/// Normalized 64-bin histogram over 4×4×4 quantized RGB.
pub fn color_histogram(img: &RasterImage) -> Result<Vec<f64>> {
    let q = quantized_map(img);
    let mut hist = vec![0.0; BINS_PER_CHANNEL.pow(3)];
    for c in &q {
        hist[*c] += 1.0;
    }
    let n = q.len() as f64;
    hist.iter_mut().for_each(|v| *v /= n);
    Ok(hist)
}

/// Mean of `−0.31·Y + 0.60·S` over pixels.
pub fn arousal_score(img: &RasterImage) -> Result<f64> {
    img.require_rgb("arousal")?;
    let n = (img.width() * img.height()) as f64;
    let sum: f64 = img
        .pixels()
        .chunks_exact(3)
        .map(|p| AROUSAL_BRIGHTNESS * luminance(p[0], p[1], p[2]) + AROUSAL_SATURATION * rgb_to_hsv(p[0], p[1], p[2])[1])
        .sum();
    Ok(sum / n)
}
