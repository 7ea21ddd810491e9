//! Yaw-per-pixel gain calibration.
//!
//! Shots at zero yaw locate the natural point of impact. The target hung
//! there defines the reference pixel column. The target is then moved
//! sideways, yaw is searched until shots hit it, and the ratio of that yaw
//! to the pixel displacement is the gain.

use serde::{Deserialize, Serialize};

use super::{ControllerError, ShootingSession};
use crate::geometry::{deg_to_rad, AimState};
use crate::vision::{detect_target, DetectorConfig, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Radians of yaw per pixel.
    pub k_p: f64,
    /// Reference column, pixels.
    pub x_ref: f64,
    /// Roll used for every shot, radians.
    pub roll_fixed: f64,
}

impl Calibration {
    pub fn validate(&self, image_width: usize) -> Result<(), ControllerError> {
        if !self.k_p.is_finite() || !self.roll_fixed.is_finite() {
            return Err(ControllerError::InvalidInput(
                "non-finite calibration".into(),
            ));
        }
        if !(self.x_ref >= 0.0 && self.x_ref < image_width as f64) {
            return Err(ControllerError::InvalidInput(format!(
                "x_ref {} outside image width {image_width}",
                self.x_ref
            )));
        }
        Ok(())
    }
}

/// `yaw / (x - x_ref)`.
pub fn compute_gain(yaw: f64, x: f64, x_ref: f64) -> Result<f64, ControllerError> {
    let dx = x - x_ref;
    if dx == 0.0 {
        return Err(ControllerError::DegenerateCalibration(format!(
            "target column {x} equals the reference column"
        )));
    }
    Ok(yaw / dx)
}

/// `(theta, phi)` for a target detected at column `x`.
pub fn aim_from_detection(x: f64, cal: &Calibration) -> (f64, f64) {
    (cal.k_p * (x - cal.x_ref), cal.roll_fixed)
}

/// The simulated range: something that can move the target and photograph it.
pub trait TargetWorld {
    /// Hangs the target with its center at `lateral` (meters right of the
    /// line of fire) and `height` (meters above ground).
    fn place_target(&mut self, lateral: f64, height: f64);
    fn capture(&mut self) -> Result<GrayImage, String>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPlan {
    pub shots_per_probe: usize,
    /// Lateral target displacements from the reference, meters.
    pub probe_offsets: Vec<f64>,
    pub roll_fixed: f64,
    pub draw_length: f64,
    /// Stop the yaw search once the mean impact is this close, meters.
    pub lateral_tolerance: f64,
    /// Yaw search bracket is `[-yaw_limit, yaw_limit]`, radians.
    pub yaw_limit: f64,
    pub max_bisections: usize,
}

impl Default for CalibrationPlan {
    fn default() -> Self {
        Self {
            shots_per_probe: 3,
            probe_offsets: vec![-0.30, 0.30],
            roll_fixed: deg_to_rad(2.0),
            draw_length: 0.65,
            lateral_tolerance: 0.01,
            yaw_limit: 0.2,
            max_bisections: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub offset: f64,
    pub yaw: f64,
    pub x: f64,
    pub gain: f64,
    /// Mean impact came within the lateral tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub calibration: Calibration,
    /// Mean `(lateral, height)` of the zero-yaw shots, meters.
    pub reference_impact: (f64, f64),
    pub probes: Vec<ProbeResult>,
}

fn mean_impact(
    session: &mut ShootingSession,
    aim: AimState,
    n: usize,
) -> Result<(f64, f64), ControllerError> {
    let (mut lat, mut h) = (0.0, 0.0);
    for _ in 0..n {
        let rec = session.execute_shot(aim, None);
        let (l, z) = rec.wall_impact().ok_or_else(|| {
            ControllerError::CalibrationFailed(match rec.fault {
                Some(f) => format!("shot {} faulted: {f}", rec.shot_index),
                None => format!("shot {} did not reach the wall", rec.shot_index),
            })
        })?;
        lat += l;
        h += z;
    }
    Ok((lat / n as f64, h / n as f64))
}

fn detect_column(
    world: &mut dyn TargetWorld,
    detector: &DetectorConfig,
) -> Result<f64, ControllerError> {
    let img = world
        .capture()
        .map_err(ControllerError::CalibrationFailed)?;
    let det = detect_target(&img, detector)
        .map_err(|e| ControllerError::CalibrationFailed(e.to_string()))?
        .ok_or_else(|| ControllerError::CalibrationFailed("target not detected".into()))?;
    Ok(det.center.0 as f64)
}

pub fn calibrate(
    session: &mut ShootingSession,
    world: &mut dyn TargetWorld,
    detector: &DetectorConfig,
    plan: &CalibrationPlan,
) -> Result<CalibrationReport, ControllerError> {
    if plan.probe_offsets.is_empty() {
        return Err(ControllerError::DegenerateCalibration(
            "no probe offsets".into(),
        ));
    }
    if plan.shots_per_probe == 0 || !(plan.lateral_tolerance > 0.0) || !(plan.yaw_limit > 0.0) {
        return Err(ControllerError::InvalidInput(
            "shots_per_probe, lateral_tolerance and yaw_limit must be positive".into(),
        ));
    }
    let aim_at = |theta: f64| {
        AimState::new(theta, plan.roll_fixed, plan.draw_length)
            .map_err(|e| ControllerError::InvalidInput(e.to_string()))
    };

    let (ref_lat, ref_h) = mean_impact(session, aim_at(0.0)?, plan.shots_per_probe)?;
    world.place_target(ref_lat, ref_h);
    let x_ref = detect_column(world, detector)?;

    let mut probes = Vec::with_capacity(plan.probe_offsets.len());
    for &offset in &plan.probe_offsets {
        let target = ref_lat + offset;
        world.place_target(target, ref_h);
        let x = detect_column(world, detector)?;

        let (mut lo, mut hi) = (-plan.yaw_limit, plan.yaw_limit);
        let mut found = None;
        for _ in 0..plan.max_bisections {
            let yaw = 0.5 * (lo + hi);
            let (lat, _) = mean_impact(session, aim_at(yaw)?, plan.shots_per_probe)?;
            let err = lat - target;
            if err.abs() <= plan.lateral_tolerance {
                found = Some(yaw);
                break;
            }
            if err < 0.0 {
                lo = yaw;
            } else {
                hi = yaw;
            }
        }
        // With shot noise the tolerance may never be met; the collapsed
        // bracket is then the estimate. A bracket pinned at a limit means the
        // target is out of reach.
        let converged = found.is_some();
        let yaw = found.unwrap_or(0.5 * (lo + hi));
        let margin = 1e-6 * plan.yaw_limit;
        if !converged && (hi < -plan.yaw_limit + margin || lo > plan.yaw_limit - margin) {
            return Err(ControllerError::CalibrationFailed(format!(
                "target offset {offset} m is beyond the yaw limit"
            )));
        }
        probes.push(ProbeResult {
            offset,
            yaw,
            x,
            gain: compute_gain(yaw, x, x_ref)?,
            converged,
        });
    }

    let k_p = probes.iter().map(|p| p.gain).sum::<f64>() / probes.len() as f64;
    Ok(CalibrationReport {
        calibration: Calibration {
            k_p,
            x_ref,
            roll_fixed: plan.roll_fixed,
        },
        reference_impact: (ref_lat, ref_h),
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_examples() {
        assert!((compute_gain(0.0873, 420.0, 320.0).unwrap() - 8.73e-4).abs() < 1e-12);
        assert_eq!(compute_gain(0.0, 100.0, 320.0).unwrap(), 0.0);
        let g = compute_gain(-0.0349, 280.0, 320.0).unwrap();
        assert!((g - 8.725e-4).abs() < 1e-9 && g > 0.0);
        assert!(matches!(
            compute_gain(0.1, 320.0, 320.0),
            Err(ControllerError::DegenerateCalibration(_))
        ));
    }

    #[test]
    fn aim_examples() {
        let cal = Calibration {
            k_p: 8.73e-4,
            x_ref: 320.0,
            roll_fixed: 0.05,
        };
        assert_eq!(aim_from_detection(320.0, &cal), (0.0, 0.05));
        let (theta, phi) = aim_from_detection(370.0, &cal);
        assert!((theta - 0.043650).abs() < 1e-12);
        assert_eq!(phi, 0.05);
        assert_eq!(aim_from_detection(270.0, &cal).0, -theta);
    }

    #[test]
    fn calibration_bounds() {
        let cal = Calibration {
            k_p: 1e-3,
            x_ref: 640.0,
            roll_fixed: 0.0,
        };
        assert!(cal.validate(640).is_err());
        assert!(Calibration {
            x_ref: 639.0,
            ..cal
        }
        .validate(640)
        .is_ok());
        assert!(Calibration {
            k_p: f64::NAN,
            x_ref: 1.0,
            ..cal
        }
        .validate(640)
        .is_err());
    }
}
