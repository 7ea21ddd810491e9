//! Gradient-directed circle Hough transform.
//!
//! Every edge pixel votes, for each integer radius in `[r_min, r_max]`, at the
//! two points a radius away along its gradient line. Centers of circles collect
//! votes from all around their circumference.

use super::{DetectorConfig, GrayImage, VisionError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircleCandidate {
    pub cx: usize,
    pub cy: usize,
    pub radius: usize,
    pub score: u32,
}

/// 3x3 Sobel gradients with replicated borders.
pub fn sobel(img: &GrayImage) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (img.width(), img.height());
    let px = |x: i64, y: i64| {
        let xc = x.clamp(0, w as i64 - 1) as usize;
        let yc = y.clamp(0, h as i64 - 1) as usize;
        f64::from(img.get(xc, yc))
    };
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let i = y as usize * w + x as usize;
            gx[i] = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1))
                - (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
            gy[i] = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1))
                - (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
        }
    }
    (gx, gy)
}

/// Minimum (box-summed) votes for a circle of radius `r` to count as a candidate.
fn vote_threshold(cfg: &DetectorConfig, r: usize) -> u32 {
    (cfg.vote_fraction * std::f64::consts::TAU * r as f64)
        .ceil()
        .max(1.0) as u32
}

pub fn hough_circles(
    img: &GrayImage,
    cfg: &DetectorConfig,
) -> Result<Vec<CircleCandidate>, VisionError> {
    cfg.validate()?;
    let (w, h) = (img.width(), img.height());
    let min_side = 2 * cfg.r_max + 1;
    if w < min_side || h < min_side {
        return Err(VisionError::InvalidInput(format!(
            "image {w}x{h} smaller than {min_side}px required for r_max={}",
            cfg.r_max
        )));
    }

    let (gx, gy) = sobel(img);
    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
    let n = mag.len() as f64;
    let mean = mag.iter().sum::<f64>() / n;
    let var = mag.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / n;
    let edge_threshold = mean + cfg.edge_threshold_sigmas * var.sqrt();

    let res = cfg.accumulator_xy_resolution;
    let aw = ((w as f64 * res).ceil() as usize).max(1);
    let ah = ((h as f64 * res).ceil() as usize).max(1);
    let nr = cfg.r_max - cfg.r_min + 1;
    let plane = aw * ah;
    let mut acc = vec![0u32; nr * plane];

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m <= edge_threshold || m <= 0.0 {
                continue;
            }
            let (dx, dy) = (gx[i] / m, gy[i] / m);
            for (ri, r) in (cfg.r_min..=cfg.r_max).enumerate() {
                let rf = r as f64;
                for sign in [-1.0, 1.0] {
                    let vx = ((x as f64 + sign * rf * dx) * res).round();
                    let vy = ((y as f64 + sign * rf * dy) * res).round();
                    if vx < 0.0 || vy < 0.0 || vx >= aw as f64 || vy >= ah as f64 {
                        continue;
                    }
                    let cell = ri * plane + vy as usize * aw + vx as usize;
                    acc[cell] = acc[cell].saturating_add(1);
                }
            }
        }
    }

    let acc = box_sum_planes(&acc, nr, aw, ah);

    let mut peaks = Vec::new();
    for ri in 0..nr {
        let r = cfg.r_min + ri;
        let threshold = vote_threshold(cfg, r);
        for ay in 0..ah {
            for ax in 0..aw {
                let idx = ri * plane + ay * aw + ax;
                let v = acc[idx];
                if v < threshold || !is_local_max(&acc, idx, v, ri, ax, ay, nr, aw, ah) {
                    continue;
                }
                let cx = ((ax as f64 / res).round() as usize).min(w - 1);
                let cy = ((ay as f64 / res).round() as usize).min(h - 1);
                peaks.push(CircleCandidate {
                    cx,
                    cy,
                    radius: r,
                    score: v,
                });
            }
        }
    }

    peaks.sort_by(|a, b| {
        b.score
            .cmp(&a.score)
            .then(a.cy.cmp(&b.cy))
            .then(a.cx.cmp(&b.cx))
            .then(a.radius.cmp(&b.radius))
    });

    // Drop near-duplicates of a stronger circle: close center, similar radius.
    let similar_radius = cfg.r_min as f64 / 2.0;
    let mut kept: Vec<CircleCandidate> = Vec::new();
    for c in peaks {
        let dominated = kept.iter().any(|k| {
            let d =
                ((k.cx as f64 - c.cx as f64).powi(2) + (k.cy as f64 - c.cy as f64).powi(2)).sqrt();
            d < cfg.r_min as f64 && (k.radius as f64 - c.radius as f64).abs() < similar_radius
        });
        if !dominated {
            kept.push(c);
        }
    }
    Ok(kept)
}

/// 3x3 spatial sum within each radius slice, so votes scattered by pixel
/// rounding still count toward their circle.
fn box_sum_planes(acc: &[u32], nr: usize, aw: usize, ah: usize) -> Vec<u32> {
    let plane = aw * ah;
    let mut rows = vec![0u32; acc.len()];
    for ri in 0..nr {
        for y in 0..ah {
            let base = ri * plane + y * aw;
            for x in 0..aw {
                let lo = x.saturating_sub(1);
                let hi = (x + 1).min(aw - 1);
                rows[base + x] = acc[base + lo..=base + hi].iter().sum();
            }
        }
    }
    let mut out = vec![0u32; acc.len()];
    for ri in 0..nr {
        for y in 0..ah {
            let lo = y.saturating_sub(1);
            let hi = (y + 1).min(ah - 1);
            for x in 0..aw {
                out[ri * plane + y * aw + x] =
                    (lo..=hi).map(|yy| rows[ri * plane + yy * aw + x]).sum();
            }
        }
    }
    out
}

/// Strict 3x3x3 maximum; equal neighbours earlier in memory order win so that
/// exactly one cell of a plateau survives.
#[allow(clippy::too_many_arguments)]
fn is_local_max(
    acc: &[u32],
    idx: usize,
    v: u32,
    ri: usize,
    ax: usize,
    ay: usize,
    nr: usize,
    aw: usize,
    ah: usize,
) -> bool {
    let plane = aw * ah;
    for dr in -1i64..=1 {
        let r2 = ri as i64 + dr;
        if r2 < 0 || r2 >= nr as i64 {
            continue;
        }
        for dy in -1i64..=1 {
            let y2 = ay as i64 + dy;
            if y2 < 0 || y2 >= ah as i64 {
                continue;
            }
            for dx in -1i64..=1 {
                let x2 = ax as i64 + dx;
                if x2 < 0 || x2 >= aw as i64 || (dr == 0 && dy == 0 && dx == 0) {
                    continue;
                }
                let j = r2 as usize * plane + y2 as usize * aw + x2 as usize;
                let u = acc[j];
                if u > v || (u == v && j < idx) {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draw_circle(img: &mut GrayImage, cx: f64, cy: f64, r: f64, width: f64) {
        for y in 0..img.height() {
            for x in 0..img.width() {
                let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
                if (d - r).abs() <= width / 2.0 {
                    img.set(x, y, 20);
                }
            }
        }
    }

    fn blurred(img: &GrayImage) -> GrayImage {
        super::super::gaussian_blur(img, 5, 1.0).unwrap()
    }

    #[test]
    fn recovers_single_circle() {
        let mut img = GrayImage::filled(200, 200, 220).unwrap();
        draw_circle(&mut img, 100.0, 100.0, 20.0, 1.0);
        let cands = hough_circles(&blurred(&img), &DetectorConfig::default()).unwrap();
        let top = cands.first().expect("a candidate");
        assert!(
            (top.cx as i64 - 100).abs() <= 2 && (top.cy as i64 - 100).abs() <= 2,
            "{top:?}"
        );
        assert!((top.radius as i64 - 20).abs() <= 2, "{top:?}");
    }

    #[test]
    fn blank_image_has_no_candidates() {
        let img = GrayImage::filled(100, 100, 128).unwrap();
        assert!(hough_circles(&img, &DetectorConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn recovers_two_disjoint_circles() {
        let mut img = GrayImage::filled(240, 160, 220).unwrap();
        draw_circle(&mut img, 60.0, 80.0, 15.0, 1.0);
        draw_circle(&mut img, 170.0, 80.0, 25.0, 1.0);
        let cands = hough_circles(&blurred(&img), &DetectorConfig::default()).unwrap();
        for (cx, cy, r) in [(60i64, 80i64, 15i64), (170, 80, 25)] {
            assert!(
                cands.iter().any(|c| (c.cx as i64 - cx).abs() <= 2
                    && (c.cy as i64 - cy).abs() <= 2
                    && (c.radius as i64 - r).abs() <= 2),
                "missing circle at ({cx},{cy}) r={r}: {:?}",
                &cands[..cands.len().min(6)]
            );
        }
    }

    #[test]
    fn too_small_image_is_rejected() {
        let img = GrayImage::filled(60, 100, 0).unwrap();
        assert!(matches!(
            hough_circles(&img, &DetectorConfig::default()),
            Err(VisionError::InvalidInput(_))
        ));
    }

    #[test]
    fn half_resolution_accumulator_still_finds_circle() {
        let mut img = GrayImage::filled(200, 200, 220).unwrap();
        draw_circle(&mut img, 90.0, 110.0, 20.0, 1.0);
        let cfg = DetectorConfig {
            accumulator_xy_resolution: 0.5,
            ..DetectorConfig::default()
        };
        let top = hough_circles(&blurred(&img), &cfg).unwrap()[0];
        assert!(
            (top.cx as i64 - 90).abs() <= 2 && (top.cy as i64 - 110).abs() <= 2,
            "{top:?}"
        );
    }
}
