//! Image descriptors for the three interestingness cues.
//!
//! Every extractor is a pure function of the pixels of a [`RasterImage`].
//! The unusualness features ([`familiarity`], [`lof_scores`]) are computed
//! over a corpus rather than per image.

mod color;
mod complexity;
mod hog;
mod ops;
mod shape;
mod texture;
mod unusual;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use color::{arousal_score, color_correlogram, color_histogram, color_moments_hsv, rgb_to_hsv, CORRELOGRAM_DISTANCES};
pub use complexity::{complexity_features, jpeg_size, JPEG_QUALITY};
pub use hog::{hog_features, HOG_LEN};
pub use ops::{canny, Plane, CANNY_SIGMA};
pub use shape::{edge_histogram_sobel, hu_moments, hu_moments_canny};
pub use texture::{glcm_features, glcm_from_levels, haar_wavelet_features, lbp_riu2_histogram, GlcmStats};
pub use unusual::{chi_squared, familiarity, lof_query, lof_scores};

/// Pixel raster with 1 (gray) or 3 (RGB) interleaved channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<f64>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::validation(format!("{channels} channels; expected 1 or 3")));
        }
        if width == 0 || height == 0 {
            return Err(Error::validation("image has zero size"));
        }
        if pixels.len() != width * height * channels {
            return Err(Error::validation(format!(
                "{} values for a {width}x{height}x{channels} image",
                pixels.len()
            )));
        }
        if let Some(v) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::validation(format!("intensity {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    /// Gray image from a closure `f(x, y)`.
    pub fn gray_from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, 1, pixels)
    }

    /// RGB image from a closure `f(x, y) -> [r, g, b]`.
    pub fn rgb_from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> [f64; 3]) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, 3, pixels)
    }

    /// Decode a PNG or BMP file (8-bit or 16-bit; alpha is dropped).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok(Self::from_dynamic(&img))
    }

    pub fn from_dynamic(img: &image::DynamicImage) -> Self {
        use image::ColorType;
        let (w, h) = (img.width() as usize, img.height() as usize);
        match img.color() {
            ColorType::L8 | ColorType::La8 | ColorType::L16 | ColorType::La16 => {
                let g = img.to_luma8();
                let pixels = g.as_raw().iter().map(|&v| f64::from(v) / 255.0).collect();
                Self { width: w, height: h, channels: 1, pixels }
            }
            _ => {
                let rgb = img.to_rgb8();
                let pixels = rgb.as_raw().iter().map(|&v| f64::from(v) / 255.0).collect();
                Self { width: w, height: h, channels: 3, pixels }
            }
        }
    }

    /// Encode as an 8-bit PNG.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes: Vec<u8> = self.pixels.iter().map(|v| (v * 255.0).round() as u8).collect();
        let color = if self.channels == 1 {
            image::ExtendedColorType::L8
        } else {
            image::ExtendedColorType::Rgb8
        };
        image::save_buffer(path, &bytes, self.width as u32, self.height as u32, color).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn is_rgb(&self) -> bool {
        self.channels == 3
    }

    /// `[r, g, b]` at `(x, y)`; gray images repeat the single channel.
    pub fn rgb(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * self.channels;
        if self.channels == 3 {
            [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
        } else {
            let v = self.pixels[i];
            [v, v, v]
        }
    }

    /// Rec. 601 luminance plane.
    pub fn gray(&self) -> Plane {
        if self.channels == 1 {
            return Plane::new(self.width, self.height, self.pixels.clone());
        }
        let data = self
            .pixels
            .chunks_exact(3)
            .map(|p| luminance(p[0], p[1], p[2]))
            .collect();
        Plane::new(self.width, self.height, data)
    }

    pub(crate) fn require_rgb(&self, what: &str) -> Result<()> {
        if self.channels != 3 {
            return Err(Error::validation(format!("{what} needs an RGB image")));
        }
        Ok(())
    }

    pub(crate) fn require_size(&self, min: usize, what: &str) -> Result<()> {
        if self.width < min || self.height < min {
            return Err(Error::validation(format!(
                "{what} needs at least {min}x{min} pixels, image is {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    /// Rotate by 90° counter-clockwise (exact pixel permutation).
    pub fn rotate90(&self) -> RasterImage {
        let (w, h, c) = (self.width, self.height, self.channels);
        let mut out = vec![0.0; self.pixels.len()];
        for y in 0..h {
            for x in 0..w {
                // (x, y) -> (y, w − 1 − x) in an h × w image
                let (nx, ny) = (y, w - 1 - x);
                for k in 0..c {
                    out[(ny * h + nx) * c + k] = self.pixels[(y * w + x) * c + k];
                }
            }
        }
        RasterImage {
            width: h,
            height: w,
            channels: c,
            pixels: out,
        }
    }
}

/// `0.299 R + 0.587 G + 0.114 B`.
pub fn luminance(r: f64, g: f64, b: f64) -> f64 {
    (0.299 * r + 0.587 * g + 0.114 * b).clamp(0.0, 1.0)
}

/// The three interestingness cues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cue {
    Unusualness,
    Aesthetics,
    GeneralPreferences,
}

impl Cue {
    pub const ALL: [Cue; 3] = [Cue::Unusualness, Cue::Aesthetics, Cue::GeneralPreferences];

    pub fn as_str(self) -> &'static str {
        match self {
            Cue::Unusualness => "unusualness",
            Cue::Aesthetics => "aesthetics",
            Cue::GeneralPreferences => "general_preferences",
        }
    }
}

impl fmt::Display for Cue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Feature-set names belonging to one cue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueGroup {
    pub cue: Cue,
    pub feature_sets: Vec<String>,
}

/// Per-image extractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extractor {
    Glcm,
    Haar,
    Lbp,
    ColorMoments,
    ColorCorrelogram,
    ColorHistogram,
    Arousal,
    EdgeHistogram,
    HuMoments,
    Complexity,
    Hog,
}

impl Extractor {
    pub const ALL: [Extractor; 11] = [
        Extractor::Glcm,
        Extractor::Haar,
        Extractor::Lbp,
        Extractor::ColorMoments,
        Extractor::ColorCorrelogram,
        Extractor::ColorHistogram,
        Extractor::Arousal,
        Extractor::EdgeHistogram,
        Extractor::HuMoments,
        Extractor::Complexity,
        Extractor::Hog,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Extractor::Glcm => "glcm",
            Extractor::Haar => "haar",
            Extractor::Lbp => "lbp",
            Extractor::ColorMoments => "color_moments",
            Extractor::ColorCorrelogram => "color_correlogram",
            Extractor::ColorHistogram => "color_histogram",
            Extractor::Arousal => "arousal",
            Extractor::EdgeHistogram => "edge_histogram",
            Extractor::HuMoments => "hu_moments",
            Extractor::Complexity => "complexity",
            Extractor::Hog => "hog",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Extractor::Glcm | Extractor::Haar => 20,
            Extractor::Lbp => 10,
            Extractor::ColorMoments => 9,
            Extractor::ColorCorrelogram => 256,
            Extractor::ColorHistogram => 64,
            Extractor::Arousal => 1,
            Extractor::EdgeHistogram => 8,
            Extractor::HuMoments => 7,
            Extractor::Complexity => 6,
            Extractor::Hog => HOG_LEN,
        }
    }

    /// Column names for the feature CSV.
    pub fn feature_names(self) -> Vec<String> {
        let base = self.name();
        match self {
            Extractor::Glcm => {
                let mut names = Vec::with_capacity(20);
                for dir in ["0", "45", "90", "135"] {
                    for stat in ["contrast", "energy", "entropy", "idm", "correlation"] {
                        names.push(format!("glcm_{dir}_{stat}"));
                    }
                }
                names
            }
            Extractor::Complexity => ["entropy", "si_mean", "si_rms", "edge_mean", "edge_std", "edge_jpeg_rate"]
                .iter()
                .map(|s| format!("complexity_{s}"))
                .collect(),
            Extractor::Arousal => vec!["arousal".into()],
            _ => (0..self.dim()).map(|i| format!("{base}_{i}")).collect(),
        }
    }

    pub fn extract(self, img: &RasterImage) -> Result<Vec<f64>> {
        match self {
            Extractor::Glcm => glcm_features(img),
            Extractor::Haar => haar_wavelet_features(img),
            Extractor::Lbp => lbp_riu2_histogram(img),
            Extractor::ColorMoments => color_moments_hsv(img),
            Extractor::ColorCorrelogram => color_correlogram(img),
            Extractor::ColorHistogram => color_histogram(img),
            Extractor::Arousal => arousal_score(img).map(|a| vec![a]),
            Extractor::EdgeHistogram => edge_histogram_sobel(img),
            Extractor::HuMoments => hu_moments_canny(img),
            Extractor::Complexity => complexity_features(img),
            Extractor::Hog => hog_features(img),
        }
    }
}
