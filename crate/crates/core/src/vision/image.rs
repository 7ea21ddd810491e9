use super::VisionError;

/// 8-bit single-channel raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, VisionError> {
        if width == 0 || height == 0 {
            return Err(VisionError::InvalidInput(
                "image dimensions must be >= 1".into(),
            ));
        }
        match width.checked_mul(height) {
            Some(n) if n == data.len() => Ok(Self {
                width,
                height,
                data,
            }),
            _ => Err(VisionError::InvalidInput(format!(
                "buffer of {} bytes does not match {width}x{height}",
                data.len()
            ))),
        }
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, VisionError> {
        let n = width
            .checked_mul(height)
            .ok_or_else(|| VisionError::InvalidInput("image too large".into()))?;
        Self::new(width, height, vec![value; n])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }
}

/// 8-bit RGB raster, row-major, interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, VisionError> {
        if width == 0 || height == 0 {
            return Err(VisionError::InvalidInput(
                "image dimensions must be >= 1".into(),
            ));
        }
        match width.checked_mul(height).and_then(|n| n.checked_mul(3)) {
            Some(n) if n == data.len() => Ok(Self {
                width,
                height,
                data,
            }),
            _ => Err(VisionError::InvalidInput(format!(
                "buffer of {} bytes does not match {width}x{height}x3",
                data.len()
            ))),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// Rec. 601 luma, rounded to nearest.
pub fn luma(rgb: [u8; 3]) -> u8 {
    let y = 0.299 * f64::from(rgb[0]) + 0.587 * f64::from(rgb[1]) + 0.114 * f64::from(rgb[2]);
    y.round().clamp(0.0, 255.0) as u8
}

pub fn to_grayscale(rgb: &RgbImage) -> Result<GrayImage, VisionError> {
    let data = rgb
        .data
        .chunks_exact(3)
        .map(|c| luma([c[0], c[1], c[2]]))
        .collect();
    GrayImage::new(rgb.width, rgb.height, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luma_examples() {
        assert_eq!(luma([255, 255, 255]), 255);
        assert_eq!(luma([0, 0, 0]), 0);
        // round(0.299 * 255) = round(76.245)
        assert_eq!(luma([255, 0, 0]), 76);
    }

    #[test]
    fn grayscale_keeps_dimensions() {
        let rgb = RgbImage::new(2, 1, vec![255, 255, 255, 255, 0, 0]).unwrap();
        let g = to_grayscale(&rgb).unwrap();
        assert_eq!((g.width(), g.height()), (2, 1));
        assert_eq!(g.data(), &[255, 76]);
    }

    #[test]
    fn empty_images_are_rejected() {
        assert!(RgbImage::new(0, 3, vec![]).is_err());
        assert!(GrayImage::new(3, 0, vec![]).is_err());
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
    }
}
