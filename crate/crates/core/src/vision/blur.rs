use super::{GrayImage, VisionError};

/// Normalized 1-D Gaussian weights for an odd `size`.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Vec<f64>, VisionError> {
    if size == 0 || size % 2 == 0 {
        return Err(VisionError::InvalidConfig(format!(
            "blur kernel must be odd and >= 1, got {size}"
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(VisionError::InvalidConfig(format!(
            "blur sigma must be > 0, got {sigma}"
        )));
    }
    let half = (size / 2) as i64;
    let mut w: Vec<f64> = (-half..=half)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= sum);
    Ok(w)
}

/// Separable Gaussian blur with edge-replicated borders. Both passes run in
/// floating point; the result is rounded once at the end.
pub fn gaussian_blur(img: &GrayImage, kernel: usize, sigma: f64) -> Result<GrayImage, VisionError> {
    let weights = gaussian_kernel(kernel, sigma)?;
    let half = (kernel / 2) as i64;
    let (w, h) = (img.width(), img.height());
    let src = img.data();

    let clamp = |v: i64, hi: usize| v.clamp(0, hi as i64 - 1) as usize;

    let mut horizontal = vec![0.0f64; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, wt) in weights.iter().enumerate() {
                let sx = clamp(x as i64 + k as i64 - half, w);
                acc += wt * f64::from(row[sx]);
            }
            horizontal[y * w + x] = acc;
        }
    }

    let mut out = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, wt) in weights.iter().enumerate() {
                let sy = clamp(y as i64 + k as i64 - half, h);
                acc += wt * horizontal[sy * w + x];
            }
            out[y * w + x] = acc.round().clamp(0.0, 255.0) as u8;
        }
    }
    GrayImage::new(w, h, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct 2-D normalized Gaussian, built without the separable path.
    fn kernel_2d(size: usize, sigma: f64) -> Vec<Vec<f64>> {
        let half = (size / 2) as i64;
        let mut k = vec![vec![0.0; size]; size];
        let mut sum = 0.0;
        for (r, row) in k.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                let dy = r as i64 - half;
                let dx = c as i64 - half;
                *v = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                sum += *v;
            }
        }
        k.iter_mut().flatten().for_each(|v| *v /= sum);
        k
    }

    #[test]
    fn constant_image_is_fixed_point() {
        let img = GrayImage::filled(9, 7, 128).unwrap();
        assert_eq!(gaussian_blur(&img, 5, 1.0).unwrap(), img);
    }

    #[test]
    fn impulse_center_matches_2d_oracle() {
        let mut img = GrayImage::filled(11, 11, 0).unwrap();
        img.set(5, 5, 255);
        let out = gaussian_blur(&img, 5, 1.0).unwrap();
        let k = kernel_2d(5, 1.0);
        assert_eq!(out.get(5, 5), (255.0 * k[2][2]).round() as u8);
        // Frozen from the oracle: 255 * 0.162103 = 41.34.
        assert_eq!(out.get(5, 5), 41);
        for dy in 0..5 {
            for dx in 0..5 {
                let expected = (255.0 * k[dy][dx]).round() as u8;
                assert_eq!(out.get(3 + dx, 3 + dy), expected, "offset ({dx},{dy})");
            }
        }
    }

    #[test]
    fn single_pixel_image_is_unchanged() {
        let img = GrayImage::new(1, 1, vec![77]).unwrap();
        assert_eq!(gaussian_blur(&img, 5, 1.0).unwrap(), img);
    }

    #[test]
    fn even_kernel_is_rejected() {
        let img = GrayImage::filled(4, 4, 0).unwrap();
        assert!(matches!(
            gaussian_blur(&img, 4, 1.0),
            Err(VisionError::InvalidConfig(_))
        ));
        assert!(gaussian_blur(&img, 3, 0.0).is_err());
    }

    #[test]
    fn interior_mean_is_preserved() {
        let mut data = Vec::with_capacity(64 * 64);
        let mut s: u32 = 12345;
        for _ in 0..64 * 64 {
            s = s.wrapping_mul(1103515245).wrapping_add(12345);
            data.push((s >> 24) as u8);
        }
        let img = GrayImage::new(64, 64, data).unwrap();
        let out = gaussian_blur(&img, 5, 1.0).unwrap();
        let mean = |im: &GrayImage, lo: usize, hi: usize| {
            let mut s = 0.0;
            for y in lo..hi {
                for x in lo..hi {
                    s += f64::from(im.get(x, y));
                }
            }
            s / ((hi - lo) * (hi - lo)) as f64
        };
        let after = mean(&out, 4, 60);
        let before = mean(&img, 4, 60);
        assert!((after - before).abs() <= 1.0, "{after} vs {before}");
    }
}
