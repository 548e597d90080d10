//! Visual complexity: gray entropy, spatial information and edge-map statistics.

use image::codecs::jpeg::JpegEncoder;
use image::ExtendedColorType;

use super::ops::canny;
use super::RasterImage;
use crate::error::{Error, Result};

/// Baseline JPEG quality for the edge-map compression rate.
pub const JPEG_QUALITY: u8 = 75;

/// Byte size of a single-channel 8-bit buffer after JPEG encoding.
pub fn jpeg_size(gray: &[u8], width: usize, height: usize) -> Result<usize> {
    let mut buf = Vec::new();
    JpegEncoder::new_with_quality(&mut buf, JPEG_QUALITY)
        .encode(gray, width as u32, height as u32, ExtendedColorType::L8)
        .map_err(|e| Error::validation(format!("JPEG encoding failed: {e}")))?;
    Ok(buf.len())
}

/// `[gray entropy, SI mean, SI rms, edge mean, edge std, edge JPEG rate]`.
///
/// Entropy is in bits over 256 gray levels. SI is the Sobel magnitude
/// image. The edge map is the binary Canny map; its compression rate is the
/// encoded size divided by the raw 8-bit size.
pub fn complexity_features(img: &RasterImage) -> Result<Vec<f64>> {
    let g = img.gray();
    let n = g.data.len() as f64;

    let mut hist = [0usize; 256];
    for &v in &g.data {
        hist[(v * 255.0).round() as usize] += 1;
    }
    let entropy: f64 = hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    let entropy = if entropy == 0.0 { 0.0 } else { entropy };

    let si = g.sobel_magnitude();
    let si_mean = si.data.iter().sum::<f64>() / n;
    let si_rms = (si.data.iter().map(|v| v * v).sum::<f64>() / n).sqrt();

    let edges = canny(&g);
    let on = edges.iter().filter(|&&e| e).count() as f64;
    let edge_mean = on / n;
    let edge_std = (edge_mean * (1.0 - edge_mean)).max(0.0).sqrt();
    let bytes: Vec<u8> = edges.iter().map(|&e| if e { 255 } else { 0 }).collect();
    let rate = jpeg_size(&bytes, g.width, g.height)? as f64 / n;

    Ok(vec![entropy, si_mean, si_rms, edge_mean, edge_std, rate])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_image() {
        let f = complexity_features(&RasterImage::gray_from_fn(32, 32, |_, _| 0.5).unwrap()).unwrap();
        assert_eq!(&f[..5], &[0.0; 5]);
        assert!(f[5] > 0.0);
    }

    #[test]
    fn uniform_histogram_has_eight_bits() {
        let img = RasterImage::gray_from_fn(16, 16, |x, y| (y * 16 + x) as f64 / 255.0).unwrap();
        assert!((complexity_features(&img).unwrap()[0] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn edge_std_is_population_std() {
        let img = RasterImage::gray_from_fn(32, 32, |x, _| if x >= 16 { 1.0 } else { 0.0 }).unwrap();
        let f = complexity_features(&img).unwrap();
        let edges = canny(&img.gray());
        let vals: Vec<f64> = edges.iter().map(|&e| if e { 1.0 } else { 0.0 }).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
        assert!((f[3] - mean).abs() < 1e-15);
        assert!((f[4] - var.sqrt()).abs() < 1e-12);
        assert!(f[1] > 0.0 && f[2] >= f[1]);
    }

    #[test]
    fn noise_compresses_worse_than_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let px: Vec<f64> = (0..64 * 64).map(|_| rng.random_range(0.0..1.0)).collect();
        let noisy = complexity_features(&RasterImage::new(64, 64, 1, px).unwrap()).unwrap();
        let flat = complexity_features(&RasterImage::gray_from_fn(64, 64, |_, _| 0.3).unwrap()).unwrap();
        assert!(noisy[5] > flat[5]);
    }

    #[test]
    fn jpeg_is_deterministic() {
        let buf: Vec<u8> = (0..400).map(|i| (i * 37 % 256) as u8).collect();
        assert_eq!(jpeg_size(&buf, 20, 20).unwrap(), jpeg_size(&buf, 20, 20).unwrap());
    }
}
