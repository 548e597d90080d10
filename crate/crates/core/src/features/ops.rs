//! Shared single-channel image operations.

/// Single-channel image stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

/// Gaussian smoothing used before Canny.
pub const CANNY_SIGMA: f64 = 1.4;
const CANNY_RADIUS: usize = 5;
const CANNY_HIGH: f64 = 0.2;
const CANNY_LOW: f64 = 0.5;

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height);
        Self { width, height, data }
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Pixel with replicated borders.
    pub fn clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn crop(&self, width: usize, height: usize) -> Plane {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            data.extend_from_slice(&self.data[y * self.width..y * self.width + width]);
        }
        Plane::new(width, height, data)
    }

    /// Bilinear resampling with pixel-centre alignment.
    pub fn resize(&self, width: usize, height: usize) -> Plane {
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (self.height - 1) as f64);
            let y0 = fy.floor() as usize;
            let y1 = (y0 + 1).min(self.height - 1);
            let ty = fy - y0 as f64;
            for x in 0..width {
                let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (self.width - 1) as f64);
                let x0 = fx.floor() as usize;
                let x1 = (x0 + 1).min(self.width - 1);
                let tx = fx - x0 as f64;
                // a + t(b − a) reproduces flat regions exactly
                let lerp = |a: f64, b: f64, t: f64| a + t * (b - a);
                let top = lerp(self.get(x0, y0), self.get(x1, y0), tx);
                let bot = lerp(self.get(x0, y1), self.get(x1, y1), tx);
                data.push(lerp(top, bot, ty));
            }
        }
        Plane::new(width, height, data)
    }

    /// Sobel derivatives `(gx, gy)` with replicated borders.
    pub fn sobel(&self) -> (Plane, Plane) {
        let (w, h) = (self.width, self.height);
        let mut gx = vec![0.0; w * h];
        let mut gy = vec![0.0; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                let p = |dx: isize, dy: isize| self.clamped(x + dx, y + dy);
                let i = y as usize * w + x as usize;
                gx[i] = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
                gy[i] = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            }
        }
        (Plane::new(w, h, gx), Plane::new(w, h, gy))
    }

    /// Sobel gradient magnitude.
    pub fn sobel_magnitude(&self) -> Plane {
        let (gx, gy) = self.sobel();
        let data = gx.data.iter().zip(&gy.data).map(|(a, b)| a.hypot(*b)).collect();
        Plane::new(self.width, self.height, data)
    }

    /// Separable Gaussian blur with replicated borders.
    pub fn gaussian_blur(&self, sigma: f64, radius: usize) -> Plane {
        let r = radius as isize;
        let mut kernel: Vec<f64> = (-r..=r).map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp()).collect();
        let total: f64 = kernel.iter().sum();
        kernel.iter_mut().for_each(|k| *k /= total);

        let (w, h) = (self.width, self.height);
        let mut tmp = vec![0.0; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                tmp[y as usize * w + x as usize] =
                    (-r..=r).map(|i| kernel[(i + r) as usize] * self.clamped(x + i, y)).sum();
            }
        }
        let tmp = Plane::new(w, h, tmp);
        let mut out = vec![0.0; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                out[y as usize * w + x as usize] =
                    (-r..=r).map(|i| kernel[(i + r) as usize] * tmp.clamped(x, y + i)).sum();
            }
        }
        Plane::new(w, h, out)
    }
}

/// Canny edge map: Gaussian smoothing, Sobel gradients, non-maximum
/// suppression and 8-connected hysteresis with thresholds relative to the
/// largest gradient magnitude.
pub fn canny(gray: &Plane) -> Vec<bool> {
    let (w, h) = (gray.width, gray.height);
    let smooth = gray.gaussian_blur(CANNY_SIGMA, CANNY_RADIUS);
    let (gx, gy) = smooth.sobel();
    let mag: Vec<f64> = gx.data.iter().zip(&gy.data).map(|(a, b)| a.hypot(*b)).collect();
    let max = mag.iter().cloned().fold(0.0, f64::max);
    if max <= 1e-12 {
        return vec![false; w * h];
    }
    let m = Plane::new(w, h, mag);

    let mut thin = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let v = m.data[i];
            if v == 0.0 {
                continue;
            }
            let mut angle = gy.data[i].atan2(gx.data[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            let (dx, dy): (isize, isize) = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let (xi, yi) = (x as isize, y as isize);
            if v >= m.clamped(xi + dx, yi + dy) && v >= m.clamped(xi - dx, yi - dy) {
                thin[i] = v;
            }
        }
    }

    let high = CANNY_HIGH * max;
    let low = CANNY_LOW * high;
    let mut edge = vec![false; w * h];
    let mut stack: Vec<usize> = Vec::new();
    for (i, &v) in thin.iter().enumerate() {
        if v >= high {
            edge[i] = true;
            stack.push(i);
        }
    }
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !edge[j] && thin[j] >= low {
                    edge[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    edge
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sobel_on_a_ramp() {
        let p = Plane::new(4, 3, (0..12).map(|i| (i % 4) as f64).collect());
        let (gx, gy) = p.sobel();
        // interior: (2+4+2) − (0+0+0) for unit slope over two pixels
        assert_eq!(gx.get(1, 1), 8.0);
        assert_eq!(gy.get(1, 1), 0.0);
        // replicated border halves the span
        assert_eq!(gx.get(0, 1), 4.0);
    }

    #[test]
    fn blur_preserves_constants() {
        let p = Plane::new(6, 5, vec![0.3; 30]);
        let b = p.gaussian_blur(1.4, 5);
        assert!(b.data.iter().all(|v| (v - 0.3).abs() < 1e-12));
    }

    #[test]
    fn resize_identity_and_constant() {
        let p = Plane::new(5, 4, (0..20).map(|i| i as f64 / 20.0).collect());
        assert_eq!(p.resize(5, 4), p);
        let c = Plane::new(7, 9, vec![0.25; 63]).resize(16, 16);
        assert!(c.data.iter().all(|v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn canny_finds_a_square_outline() {
        let mut data = vec![0.0; 32 * 32];
        for y in 10..22 {
            for x in 10..22 {
                data[y * 32 + x] = 1.0;
            }
        }
        let edge = canny(&Plane::new(32, 32, data));
        let count = edge.iter().filter(|&&e| e).count();
        assert!(count > 30 && count < 120, "{count}");
        assert!(!edge[0] && !edge[16 * 32 + 16]);
        assert!(canny(&Plane::new(16, 16, vec![0.5; 256])).iter().all(|&e| !e));
    }
}
