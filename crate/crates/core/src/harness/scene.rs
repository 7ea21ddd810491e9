//! Wall, target and pinhole camera, plus the synthetic target renderer.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::vision::GrayImage;

/// World frame for the scene: origin on the ground below the robot, `x`
/// downrange, `y` lateral (positive right), `z` up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    /// Horizontal distance from the robot to the wall, meters.
    pub wall_distance: f64,
    /// Height of the target center, meters.
    pub target_height: f64,
    pub target_diameter: f64,
    pub inner_ring_diameter: f64,
    /// Printed ring line width, meters.
    pub ring_width: f64,
    pub camera: PinholeCamera,
}

impl Default for Scene {
    fn default() -> Self {
        Self {
            wall_distance: 10.0,
            target_height: 1.145,
            target_diameter: 0.49,
            inner_ring_diameter: 0.097,
            ring_width: 0.0045,
            camera: PinholeCamera::default(),
        }
    }
}

impl Scene {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let pos = [
            self.wall_distance,
            self.target_height,
            self.target_diameter,
            self.inner_ring_diameter,
            self.ring_width,
        ];
        if pos.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(HarnessError::Config(
                "scene dimensions must be positive".into(),
            ));
        }
        if 3.0 * self.inner_ring_diameter > self.target_diameter {
            return Err(HarnessError::Config(
                "three rings do not fit on the target face".into(),
            ));
        }
        if self.target_height < self.target_diameter / 2.0 {
            return Err(HarnessError::Config(
                "target would reach below the ground".into(),
            ));
        }
        self.camera.validate()
    }

    /// Radius of the innermost ring, meters.
    pub fn ring_radius(&self) -> f64 {
        self.inner_ring_diameter / 2.0
    }

    /// World position of a target hung on the wall at `lateral` (right of the
    /// line of fire, measured along the wall) and `height`.
    pub fn target_position(&self, lateral: f64, height: f64) -> Result<[f64; 3], HarnessError> {
        let d = self.wall_distance;
        if !(lateral.abs() < d) {
            return Err(HarnessError::Render(format!(
                "lateral offset {lateral} m is off the wall"
            )));
        }
        Ok([(d * d - lateral * lateral).sqrt(), lateral, height])
    }
}

/// Head camera looking straight downrange, principal point at the image
/// center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinholeCamera {
    pub focal_px: f64,
    pub width: usize,
    pub height: usize,
    /// Mounting height above ground, meters.
    pub mount_height: f64,
}

impl Default for PinholeCamera {
    fn default() -> Self {
        Self {
            focal_px: 4500.0,
            width: 640,
            height: 480,
            mount_height: 1.20,
        }
    }
}

impl PinholeCamera {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.focal_px.is_finite() && self.focal_px > 0.0) {
            return Err(HarnessError::Config("focal length must be positive".into()));
        }
        if self.width == 0 || self.height == 0 || self.width > 8192 || self.height > 8192 {
            return Err(HarnessError::Config(format!(
                "image size {}x{} out of range",
                self.width, self.height
            )));
        }
        if !self.mount_height.is_finite() {
            return Err(HarnessError::Config("camera height must be finite".into()));
        }
        Ok(())
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (self.width as f64 / 2.0, self.height as f64 / 2.0)
    }

    /// Pixel coordinates of a world point, or `None` behind the camera.
    pub fn project(&self, p: [f64; 3]) -> Option<(f64, f64)> {
        if p[0] <= 0.0 {
            return None;
        }
        let (cx, cy) = self.principal_point();
        Some((
            cx + self.focal_px * p[1] / p[0],
            cy - self.focal_px * (p[2] - self.mount_height) / p[0],
        ))
    }
}

/// Gray levels of the printed target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingStyle {
    pub background: u8,
    pub ink: u8,
}

impl Default for RingStyle {
    fn default() -> Self {
        Self {
            background: 220,
            ink: 30,
        }
    }
}

/// Draws `rings` concentric rings of radii `k * radius` (pixels, line width
/// `line_width`) centered at `center`, with 2x2 supersampling.
pub fn render_rings(
    width: usize,
    height: usize,
    center: (f64, f64),
    radius: f64,
    line_width: f64,
    rings: usize,
    style: RingStyle,
) -> Result<GrayImage, HarnessError> {
    let mut img = GrayImage::filled(width, height, style.background)
        .map_err(|e| HarnessError::Render(e.to_string()))?;
    let half = line_width / 2.0;
    let outer = rings as f64 * radius + half + 1.0;
    let x0 = (center.0 - outer).floor().max(0.0) as usize;
    let y0 = (center.1 - outer).floor().max(0.0) as usize;
    let x1 = ((center.0 + outer).ceil().max(0.0) as usize).min(width);
    let y1 = ((center.1 + outer).ceil().max(0.0) as usize).min(height);
    let (bg, ink) = (f64::from(style.background), f64::from(style.ink));
    for y in y0..y1 {
        for x in x0..x1 {
            let mut hits = 0;
            for (sx, sy) in [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)] {
                // Pixel centers sit on integer coordinates.
                let dx = x as f64 + sx - 0.5 - center.0;
                let dy = y as f64 + sy - 0.5 - center.1;
                let d = dx.hypot(dy);
                if (1..=rings).any(|k| (d - k as f64 * radius).abs() <= half) {
                    hits += 1;
                }
            }
            if hits > 0 {
                let v = bg + (ink - bg) * hits as f64 / 4.0;
                img.set(x, y, v.round() as u8);
            }
        }
    }
    Ok(img)
}

/// Where the target lands in the image and its projected innermost radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetProjection {
    pub center: (f64, f64),
    pub ring_radius_px: f64,
    pub line_width_px: f64,
}

pub fn project_target(
    scene: &Scene,
    lateral: f64,
    height: f64,
) -> Result<TargetProjection, HarnessError> {
    let p = scene.target_position(lateral, height)?;
    let center = scene
        .camera
        .project(p)
        .ok_or_else(|| HarnessError::Render("target behind the camera".into()))?;
    let scale = scene.camera.focal_px / p[0];
    Ok(TargetProjection {
        center,
        ring_radius_px: scene.ring_radius() * scale,
        line_width_px: scene.ring_width * scale,
    })
}

/// Renders the three-ring target hung at `(lateral, height)` on the wall.
pub fn render_target(
    scene: &Scene,
    lateral: f64,
    height: f64,
    style: RingStyle,
) -> Result<GrayImage, HarnessError> {
    scene.validate()?;
    let proj = project_target(scene, lateral, height)?;
    let cam = &scene.camera;
    let extent = 3.0 * proj.ring_radius_px + proj.line_width_px;
    let (u, v) = proj.center;
    if u - extent < 0.0
        || v - extent < 0.0
        || u + extent > cam.width as f64
        || v + extent > cam.height as f64
    {
        return Err(HarnessError::Render(format!(
            "target at ({u:.1}, {v:.1}) px with outer radius {extent:.1} px leaves the {}x{} frame",
            cam.width, cam.height
        )));
    }
    render_rings(
        cam.width,
        cam.height,
        proj.center,
        proj.ring_radius_px,
        proj.line_width_px,
        3,
        style,
    )
}

/// Adds zero-mean Gaussian noise of `sigma` gray levels, saturating.
pub fn add_gaussian_noise<R: Rng + ?Sized>(img: &mut GrayImage, sigma: f64, rng: &mut R) {
    for p in img.data_mut() {
        let n: f64 = rng.sample(StandardNormal);
        *p = (f64::from(*p) + sigma * n).round().clamp(0.0, 255.0) as u8;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dark_centroid(img: &GrayImage) -> (f64, f64) {
        let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
        for y in 0..img.height() {
            for x in 0..img.width() {
                let w = 220.0 - f64::from(img.get(x, y));
                sx += w * x as f64;
                sy += w * y as f64;
                sw += w;
            }
        }
        (sx / sw, sy / sw)
    }

    #[test]
    fn on_axis_target_is_centered() {
        let mut scene = Scene::default();
        scene.camera.mount_height = scene.target_height;
        let img = render_target(&scene, 0.0, scene.target_height, RingStyle::default()).unwrap();
        let (cx, cy) = dark_centroid(&img);
        assert!(
            (cx - 320.0).abs() < 1e-6 && (cy - 240.0).abs() < 1e-6,
            "({cx}, {cy})"
        );
    }

    #[test]
    fn projected_radius_follows_focal_length() {
        let mut scene = Scene::default();
        // Focal length putting the inner ring at 12 px from 10 m.
        scene.camera.focal_px = 12.0 * 10.0 / 0.0485;
        let p = project_target(&scene, 0.0, 1.145).unwrap();
        assert!((p.ring_radius_px - 12.0).abs() < 1e-9);
        let cfg = crate::vision::DetectorConfig::default();
        assert!(cfg.r_min as f64 <= p.ring_radius_px && 2.0 * p.ring_radius_px <= cfg.r_max as f64);
        scene.camera.focal_px *= 2.0;
        let q = project_target(&scene, 0.0, 1.145).unwrap();
        assert!((q.ring_radius_px - 2.0 * p.ring_radius_px).abs() <= 1.0);
    }

    #[test]
    fn out_of_frame_target_is_an_error() {
        let scene = Scene::default();
        assert!(matches!(
            render_target(&scene, 2.0, 1.145, RingStyle::default()),
            Err(HarnessError::Render(_))
        ));
    }

    #[test]
    fn rendering_is_deterministic() {
        let scene = Scene::default();
        let a = render_target(&scene, 0.1, 1.2, RingStyle::default()).unwrap();
        let b = render_target(&scene, 0.1, 1.2, RingStyle::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ring_pixels_sit_at_multiples_of_the_radius() {
        let img =
            render_rings(200, 200, (100.0, 100.0), 20.0, 2.0, 3, RingStyle::default()).unwrap();
        for k in 1..=3 {
            assert!(img.get(100 + 20 * k, 100) < 220);
        }
        assert_eq!(img.get(100 + 10, 100), 220);
        assert_eq!(img.get(100 + 70, 100), 220);
    }
}
