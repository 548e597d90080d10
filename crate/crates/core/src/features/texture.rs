//! Texture descriptors: GLCM statistics, rotation-invariant LBP, Haar energies.

use super::ops::Plane;
use super::RasterImage;
use crate::error::{Error, Result};

const GLCM_LEVELS: usize = 8;
/// `(dx, dy)` for 0°, 45°, 90° and 135° with y pointing down.
const GLCM_OFFSETS: [(isize, isize); 4] = [(1, 0), (1, -1), (0, -1), (-1, -1)];
const HAAR_LEVELS: usize = 3;

/// Haralick statistics of one normalized co-occurrence matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlcmStats {
    pub contrast: f64,
    pub energy: f64,
    pub entropy: f64,
    pub idm: f64,
    pub correlation: f64,
}

impl GlcmStats {
    pub fn to_array(self) -> [f64; 5] {
        [self.contrast, self.energy, self.entropy, self.idm, self.correlation]
    }

    fn from_matrix(p: &[f64], levels: usize) -> Self {
        let at = |i: usize, j: usize| p[i * levels + j];
        let (mut mi, mut mj) = (0.0, 0.0);
        for i in 0..levels {
            for j in 0..levels {
                mi += i as f64 * at(i, j);
                mj += j as f64 * at(i, j);
            }
        }
        let (mut vi, mut vj, mut cov) = (0.0, 0.0, 0.0);
        let mut s = GlcmStats {
            contrast: 0.0,
            energy: 0.0,
            entropy: 0.0,
            idm: 0.0,
            correlation: 0.0,
        };
        for i in 0..levels {
            for j in 0..levels {
                let v = at(i, j);
                let d = i as f64 - j as f64;
                s.contrast += d * d * v;
                s.energy += v * v;
                if v > 0.0 {
                    s.entropy -= v * v.log2();
                }
                s.idm += v / (1.0 + d * d);
                vi += (i as f64 - mi).powi(2) * v;
                vj += (j as f64 - mj).powi(2) * v;
                cov += (i as f64 - mi) * (j as f64 - mj) * v;
            }
        }
        if vi > 1e-15 && vj > 1e-15 {
            s.correlation = cov / (vi * vj).sqrt();
        }
        s
    }
}

/// Symmetric, normalized co-occurrence statistics of an already quantized
/// level map for one pixel offset. `None` when no pixel pair fits.
pub fn glcm_from_levels(
    levels: &[usize],
    width: usize,
    height: usize,
    num_levels: usize,
    offset: (isize, isize),
) -> Option<GlcmStats> {
    let mut counts = vec![0.0; num_levels * num_levels];
    let mut total = 0.0;
    for y in 0..height as isize {
        for x in 0..width as isize {
            let (nx, ny) = (x + offset.0, y + offset.1);
            if nx < 0 || ny < 0 || nx >= width as isize || ny >= height as isize {
                continue;
            }
            let a = levels[y as usize * width + x as usize];
            let b = levels[ny as usize * width + nx as usize];
            counts[a * num_levels + b] += 1.0;
            counts[b * num_levels + a] += 1.0;
            total += 2.0;
        }
    }
    if total == 0.0 {
        return None;
    }
    counts.iter_mut().for_each(|c| *c /= total);
    Some(GlcmStats::from_matrix(&counts, num_levels))
}

fn quantize(g: f64, levels: usize) -> usize {
    ((g * levels as f64).floor() as usize).min(levels - 1)
}

/// Five GLCM statistics for each of the four directions at distance 1,
/// direction-major.
pub fn glcm_features(img: &RasterImage) -> Result<Vec<f64>> {
    img.require_size(2, "GLCM")?;
    let gray = img.gray();
    let levels: Vec<usize> = gray.data.iter().map(|&g| quantize(g, GLCM_LEVELS)).collect();
    let mut out = Vec::with_capacity(20);
    for offset in GLCM_OFFSETS {
        let stats = glcm_from_levels(&levels, gray.width, gray.height, GLCM_LEVELS, offset)
            .expect("a 2x2 image has pairs in every direction");
        out.extend_from_slice(&stats.to_array());
    }
    Ok(out)
}

/// riu2 code of a circular 8-bit pattern: the number of set bits when the
/// pattern has at most two 0/1 transitions, 9 otherwise.
fn riu2_code(bits: [bool; 8]) -> usize {
    let transitions = (0..8).filter(|&i| bits[i] != bits[(i + 1) % 8]).count();
    if transitions <= 2 {
        bits.iter().filter(|&&b| b).count()
    } else {
        9
    }
}

/// Interpolated neighbour at diagonal offset `(sx, sy)` from `(x, y)`.
/// Written symmetric in the two axis neighbours so that rotating the image
/// by 90° reproduces each sample bit for bit.
fn diagonal_sample(g: &Plane, x: usize, y: usize, sx: isize, sy: isize) -> f64 {
    let f = std::f64::consts::FRAC_1_SQRT_2;
    let (xi, yi) = (x as isize, y as isize);
    let c = g.get(x, y);
    let a = g.get((xi + sx) as usize, y);
    let b = g.get(x, (yi + sy) as usize);
    let d = g.get((xi + sx) as usize, (yi + sy) as usize);
    c + f * ((a - c) + (b - c)) + f * f * ((d + c) - (a + b))
}

/// Normalized 10-bin histogram of rotation-invariant uniform LBP codes with
/// `P = 8`, `R = 1` over interior pixels.
pub fn lbp_riu2_histogram(img: &RasterImage) -> Result<Vec<f64>> {
    img.require_size(3, "LBP")?;
    let g = img.gray();
    let mut hist = vec![0.0; 10];
    for y in 1..g.height - 1 {
        for x in 1..g.width - 1 {
            let c = g.get(x, y);
            // counter-clockwise starting east
            let samples = [
                g.get(x + 1, y),
                diagonal_sample(&g, x, y, 1, -1),
                g.get(x, y - 1),
                diagonal_sample(&g, x, y, -1, -1),
                g.get(x - 1, y),
                diagonal_sample(&g, x, y, -1, 1),
                g.get(x, y + 1),
                diagonal_sample(&g, x, y, 1, 1),
            ];
            let bits = samples.map(|s| s >= c);
            hist[riu2_code(bits)] += 1.0;
        }
    }
    let total: f64 = hist.iter().sum();
    hist.iter_mut().for_each(|h| *h /= total);
    Ok(hist)
}

/// One orthonormal 2D Haar step: `(approx, horizontal, vertical, diagonal)`.
/// The horizontal band responds to intensity changes between rows.
fn haar_step(p: &Plane) -> [Plane; 4] {
    let (w, h) = (p.width / 2, p.height / 2);
    let mut bands = [vec![0.0; w * h], vec![0.0; w * h], vec![0.0; w * h], vec![0.0; w * h]];
    for y in 0..h {
        for x in 0..w {
            let a = p.get(2 * x, 2 * y);
            let b = p.get(2 * x + 1, 2 * y);
            let c = p.get(2 * x, 2 * y + 1);
            let d = p.get(2 * x + 1, 2 * y + 1);
            let i = y * w + x;
            bands[0][i] = (a + b + c + d) / 2.0;
            bands[1][i] = (a + b - c - d) / 2.0;
            bands[2][i] = (a - b + c - d) / 2.0;
            bands[3][i] = (a - b - c + d) / 2.0;
        }
    }
    bands.map(|data| Plane::new(w, h, data))
}

fn abs_mean_and_energy(p: &Plane) -> [f64; 2] {
    let n = p.data.len() as f64;
    [
        p.data.iter().map(|v| v.abs()).sum::<f64>() / n,
        p.data.iter().map(|v| v * v).sum::<f64>() / n,
    ]
}

/// Mean absolute coefficient and mean energy of the horizontal, vertical
/// and diagonal bands at levels 1 to 3, then of the final approximation.
pub fn haar_wavelet_features(img: &RasterImage) -> Result<Vec<f64>> {
    let block = 1 << HAAR_LEVELS;
    img.require_size(block, "Haar wavelet")?;
    let g = img.gray();
    let mut approx = g.crop(g.width / block * block, g.height / block * block);
    let mut out = Vec::with_capacity(20);
    for _ in 0..HAAR_LEVELS {
        let [a, hz, vt, dg] = haar_step(&approx);
        for band in [&hz, &vt, &dg] {
            out.extend_from_slice(&abs_mean_and_energy(band));
        }
        approx = a;
    }
    out.extend_from_slice(&abs_mean_and_energy(&approx));
    if out.len() != 20 {
        return Err(Error::validation("Haar feature length mismatch"));
    }
    Ok(out)
}
