//! Concentric three-ring target detection.
//!
//! Pipeline: grayscale, Gaussian blur, circle Hough transform, then for each
//! circle candidate (strongest first) an eight-direction radial check that the
//! candidate center is surrounded by rings at radii `r, 2r, 3r`.

mod blur;
mod hough;
mod image;
pub mod netpbm;
mod rings;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use blur::{gaussian_blur, gaussian_kernel};
pub use hough::{hough_circles, sobel, CircleCandidate};
pub use image::{luma, to_grayscale, GrayImage, RgbImage};
pub use rings::{
    direction_is_positive, direction_radius, nms_1d, nms_window, radial_difference_vector,
    validate_concentric, ConcentricEvidence, Direction,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VisionError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
    #[error("malformed netpbm data: {0}")]
    Netpbm(String),
}

/// Detector tuning. Defaults are the 10 m setup: 5 px blur, radii 10..30 px,
/// difference threshold 40, +-10% suppression window, 50% ring tolerance and
/// at least five of eight directions agreeing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub blur_kernel: usize,
    pub blur_sigma: f64,
    pub r_min: usize,
    pub r_max: usize,
    pub diff_threshold: u8,
    pub nms_window_fraction: f64,
    pub radius_tolerance: f64,
    pub min_positive_directions: usize,
    /// Accumulator cells per image pixel along x and y.
    pub accumulator_xy_resolution: f64,
    /// Edge pixels exceed `mean + k * stddev` of the gradient magnitude.
    pub edge_threshold_sigmas: f64,
    /// Circle needs at least this fraction of its circumference in votes.
    pub vote_fraction: f64,
    /// Walk length for difference vectors; `None` means `4 * r_max`.
    pub diff_length: Option<usize>,
    /// How many Hough candidates are checked before giving up.
    pub max_candidates: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            blur_kernel: 5,
            blur_sigma: 1.0,
            r_min: 10,
            r_max: 30,
            diff_threshold: 40,
            nms_window_fraction: 0.10,
            radius_tolerance: 0.50,
            min_positive_directions: 5,
            accumulator_xy_resolution: 1.0,
            edge_threshold_sigmas: 1.5,
            vote_fraction: 0.25,
            diff_length: None,
            max_candidates: 20,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), VisionError> {
        let bad = |m: String| Err(VisionError::InvalidConfig(m));
        if self.blur_kernel == 0 || self.blur_kernel % 2 == 0 {
            return bad(format!("blur_kernel must be odd, got {}", self.blur_kernel));
        }
        if !(self.blur_sigma > 0.0) {
            return bad("blur_sigma must be > 0".into());
        }
        if !(0 < self.r_min && self.r_min < self.r_max) {
            return bad(format!(
                "need 0 < r_min < r_max, got {} and {}",
                self.r_min, self.r_max
            ));
        }
        if !(self.nms_window_fraction > 0.0 && self.nms_window_fraction < 1.0) {
            return bad("nms_window_fraction must be in (0, 1)".into());
        }
        if !(self.radius_tolerance > 0.0 && self.radius_tolerance <= 1.0) {
            return bad("radius_tolerance must be in (0, 1]".into());
        }
        if !(1..=8).contains(&self.min_positive_directions) {
            return bad("min_positive_directions must be in 1..=8".into());
        }
        if !(self.accumulator_xy_resolution > 0.0 && self.accumulator_xy_resolution <= 4.0) {
            return bad("accumulator_xy_resolution must be in (0, 4]".into());
        }
        if !(self.edge_threshold_sigmas.is_finite() && self.vote_fraction > 0.0) {
            return bad("edge_threshold_sigmas must be finite and vote_fraction > 0".into());
        }
        if self.diff_length == Some(0) || self.max_candidates == 0 {
            return bad("diff_length and max_candidates must be >= 1".into());
        }
        Ok(())
    }

    pub fn walk_length(&self) -> usize {
        self.diff_length.unwrap_or(4 * self.r_max)
    }
}

/// A located target.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetDetection {
    pub center: (usize, usize),
    pub r_avg: f64,
    pub positive_directions: usize,
    /// First (up to) three peak indices per direction, in [`Direction::ALL`] order.
    pub per_direction_maxima: [Vec<usize>; 8],
    pub candidate: CircleCandidate,
}

/// Peak indices of all eight difference vectors around `center`.
pub fn direction_maxima(
    img: &GrayImage,
    center: (usize, usize),
    cfg: &DetectorConfig,
) -> [Vec<usize>; 8] {
    std::array::from_fn(|i| {
        let v = radial_difference_vector(
            img,
            center,
            Direction::ALL[i],
            cfg.walk_length(),
            cfg.diff_threshold,
        );
        nms_1d(&v, cfg.nms_window_fraction)
    })
}

/// Runs the full pipeline on a grayscale frame (blur included).
pub fn detect_target(
    img: &GrayImage,
    cfg: &DetectorConfig,
) -> Result<Option<TargetDetection>, VisionError> {
    cfg.validate()?;
    let smooth = gaussian_blur(img, cfg.blur_kernel, cfg.blur_sigma)?;
    let candidates = hough_circles(&smooth, cfg)?;
    for cand in candidates.into_iter().take(cfg.max_candidates) {
        let center = (cand.cx, cand.cy);
        let maxima = direction_maxima(&smooth, center, cfg);
        if let Some(ev) = validate_concentric(&maxima, cfg) {
            return Ok(Some(TargetDetection {
                center,
                r_avg: ev.r_avg,
                positive_directions: ev.positive_directions,
                per_direction_maxima: maxima.map(|mut m| {
                    m.truncate(3);
                    m
                }),
                candidate: cand,
            }));
        }
    }
    Ok(None)
}

/// Color entry point: converts to grayscale first.
pub fn detect_target_rgb(
    img: &RgbImage,
    cfg: &DetectorConfig,
) -> Result<Option<TargetDetection>, VisionError> {
    detect_target(&to_grayscale(img)?, cfg)
}
