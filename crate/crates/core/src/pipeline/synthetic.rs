//! Deterministic labeled image corpus for smoke runs and the method comparison.
//!
//! Positives tend to have rarer hues, stronger saturation, higher-contrast
//! texture and a crisp foreground shape. Each cue is only weakly predictive
//! on its own, and the parameter ranges of the two classes overlap.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{Label, LabelVector};
use crate::error::{Error, Result};
use crate::features::RasterImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub size: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self { n: 200, size: 64, seed: 7 }
    }
}

/// `h`, `s`, `v` in [0, 1].
pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [f64; 3] {
    let h6 = h.rem_euclid(1.0) * 6.0;
    let sector = h6.floor() as usize % 6;
    let f = h6 - h6.floor();
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - s * f), v * (1.0 - s * (1.0 - f)));
    match sector {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}

/// One image of class `label`.
pub fn synthetic_image(label: Label, size: usize, rng: &mut ChaCha8Rng) -> Result<RasterImage> {
    let pos = label == Label::Positive;
    let hue = if pos && rng.random_bool(0.8) {
        rng.random_range(0.0..1.0)
    } else {
        Normal::new(0.08, 0.04).expect("valid normal").sample(rng)
    };
    let sat = if pos { rng.random_range(0.35..0.95) } else { rng.random_range(0.15..0.65) };
    let amp = if pos { rng.random_range(0.08..0.3) } else { rng.random_range(0.02..0.18) };
    let freq = rng.random_range(0.15..0.6);
    let theta = rng.random_range(0.0..PI);
    let (ct, st) = (theta.cos(), theta.sin());
    let shape = pos && rng.random_bool(0.85) || !pos && rng.random_bool(0.3);
    let edge_width = if pos { 0.8 } else { 4.0 };
    let cx = rng.random_range(0.3..0.7) * size as f64;
    let cy = rng.random_range(0.3..0.7) * size as f64;
    let radius = rng.random_range(0.12..0.3) * size as f64;
    let square = rng.random_bool(0.5);
    let shape_hue = hue + rng.random_range(0.3..0.7);
    let noise = Normal::new(0.0, 0.03).expect("valid normal");
    let jitter: Vec<f64> = (0..size * size).map(|_| noise.sample(rng)).collect();

    RasterImage::rgb_from_fn(size, size, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let stripe = (freq * (xf * ct + yf * st)).sin();
        let mut v = 0.55 + amp * stripe;
        let mut h = hue;
        let mut s = sat;
        if shape {
            let (dx, dy) = (xf - cx, yf - cy);
            let d = if square { dx.abs().max(dy.abs()) } else { dx.hypot(dy) };
            let inside = 1.0 / (1.0 + ((d - radius) / edge_width).exp());
            h += inside * (shape_hue - hue);
            s = s * (1.0 - inside) + inside * (s * 0.5 + 0.45);
            v = v * (1.0 - inside) + inside * 0.85;
        }
        let v = (v + jitter[y * size + x]).clamp(0.0, 1.0);
        hsv_to_rgb(h, s.clamp(0.0, 1.0), v)
    })
}

/// Write `images/*.png`, `labels.csv` and `config.toml` into `dir`.
/// Classes alternate so the corpus is balanced.
pub fn generate_corpus(dir: &Path, spec: &SyntheticSpec) -> Result<LabelVector> {
    if spec.n < 4 || spec.size < 16 {
        return Err(Error::validation("synthetic corpus needs n ≥ 4 and size ≥ 16"));
    }
    let images = dir.join("images");
    std::fs::create_dir_all(&images).map_err(|e| Error::io(&images, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let width = (spec.n - 1).to_string().len();
    let mut ids = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let label = if i % 2 == 0 { Label::Positive } else { Label::Negative };
        let id = format!("img{i:0width$}");
        synthetic_image(label, spec.size, &mut rng)?.save_png(images.join(format!("{id}.png")))?;
        ids.push(id);
        labels.push(label);
    }
    let lv = LabelVector::new(labels, ids)?;
    lv.write_csv(dir.join("labels.csv"))?;
    let cfg = dir.join("config.toml");
    std::fs::write(&cfg, SYNTHETIC_CONFIG).map_err(|e| Error::io(&cfg, e))?;
    Ok(lv)
}

/// Config written next to a generated corpus; paths are relative to it.
pub const SYNTHETIC_CONFIG: &str = r#"output = "out"

[data]
images = "images"
labels = "labels.csv"

[split]
train_fraction = 0.7
seed = 0
"#;
