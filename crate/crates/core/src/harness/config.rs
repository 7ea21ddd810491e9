//! TOML run configuration.
//!
//! Lengths are centimeters and angles degrees unless the key says otherwise
//! (`_m`, `_s`, `_px`, `_n`, `_g`). Everything is converted to SI radians and
//! meters when building the runtime types. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{HarnessError, PinholeCamera, Scene};
use crate::ballistics::{BowModel, FitGrid, LaunchState, RangeObservation, RANGE_TABLE};
use crate::controller::{CalibrationPlan, FlightSetup, NoiseModel, Rig};
use crate::geometry::{cm_to_m, deg_to_rad, rad_to_deg, Vec3};
use crate::kinematics::{ArmModel, IkConfig, JointVector};
use crate::vision::DetectorConfig;

pub const DEFAULT_CONFIG: &str = include_str!("../../data/default_config.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scene: SceneSection,
    pub camera: CameraSection,
    pub bow: BowSection,
    pub ballistics: BallisticsSection,
    pub noise: NoiseSection,
    #[serde(default)]
    pub detector: DetectorConfig,
    pub arm: ArmSection,
    pub calibration: CalibrationSection,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSection {
    pub wall_distance_m: f64,
    pub target_height_cm: f64,
    pub target_diameter_cm: f64,
    pub inner_ring_diameter_cm: f64,
    pub ring_width_cm: f64,
    pub background_level: u8,
    pub ink_level: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSection {
    pub focal_px: f64,
    pub width_px: usize,
    pub height_px: usize,
    pub mount_height_cm: f64,
    /// Gaussian noise added to captured frames, gray levels.
    pub pixel_noise_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BowSection {
    pub rated_draw_force_n: f64,
    pub rated_draw_length_cm: f64,
    pub brace_distance_cm: f64,
    pub efficiency: f64,
    pub arrow_mass_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallisticsSection {
    pub release_height_cm: f64,
    /// Per meter.
    pub drag_coefficient: f64,
    pub dt_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub sigma_yaw_deg: f64,
    pub sigma_roll_deg: f64,
    pub drift_deg_per_shot: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSection {
    /// Arm description file, relative to the config file. Built-in arm when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<PathBuf>,
    pub left_gripper_cm: [f64; 3],
    pub home_deg: Vec<f64>,
    pub waypoints: usize,
    pub ik_max_iterations: usize,
    pub ik_position_tolerance_cm: f64,
    pub ik_orientation_tolerance_deg: f64,
    pub ik_damping: f64,
    pub ik_step_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    pub enabled: bool,
    pub shots_per_probe: usize,
    pub probe_offsets_cm: Vec<f64>,
    pub roll_fixed_deg: f64,
    pub tolerance_cm: f64,
    pub yaw_limit_deg: f64,
    pub max_bisections: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub n_shots: usize,
    pub draw_length_cm: f64,
    /// Lateral displacement of the target from the natural point of impact
    /// in the vision experiment.
    pub target_offset_cm: f64,
    /// Fit efficiency and drag to `table` before the long-range sweep.
    pub fit_table: bool,
    pub shots_per_row: usize,
    pub table: Vec<TableRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRow {
    pub draw_length_cm: f64,
    pub roll_deg: f64,
    /// Measured distance, meters. Rows without one are swept but not fitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_m: Option<f64>,
}

impl TableRow {
    pub fn observation(&self) -> Option<RangeObservation> {
        self.range_m.map(|r| {
            RangeObservation::new(cm_to_m(self.draw_length_cm), deg_to_rad(self.roll_deg), r)
        })
    }
}

impl Default for Config {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_CONFIG).expect("bundled config is valid")
    }
}

fn check(cond: bool, msg: &str) -> Result<(), HarnessError> {
    if cond {
        Ok(())
    } else {
        Err(HarnessError::Config(msg.to_string()))
    }
}

impl Config {
    pub fn from_toml_str(s: &str) -> Result<Self, HarnessError> {
        let cfg: Config = toml::from_str(s).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file; a relative arm description path is resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(arm) = &cfg.arm.description {
            if arm.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.arm.description = Some(base.join(arm));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.scene()?.validate()?;
        self.bow()
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        self.detector
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let b = &self.ballistics;
        check(
            b.release_height_cm >= 0.0 && b.drag_coefficient >= 0.0,
            "release height and drag must be >= 0",
        )?;
        check(b.dt_s > 0.0 && b.dt_s <= 0.01, "dt_s must be in (0, 0.01]")?;
        let n = &self.noise;
        check(
            n.sigma_yaw_deg >= 0.0 && n.sigma_roll_deg >= 0.0 && n.drift_deg_per_shot.is_finite(),
            "noise sigmas must be >= 0",
        )?;
        check(
            self.camera.pixel_noise_sigma >= 0.0,
            "pixel_noise_sigma must be >= 0",
        )?;
        let a = &self.arm;
        check(a.waypoints >= 1, "arm.waypoints must be >= 1")?;
        check(
            a.left_gripper_cm.iter().all(|v| v.is_finite()),
            "arm.left_gripper_cm must be finite",
        )?;
        self.ik()
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let c = &self.calibration;
        check(
            c.shots_per_probe >= 1,
            "calibration.shots_per_probe must be >= 1",
        )?;
        check(
            c.tolerance_cm > 0.0 && c.yaw_limit_deg > 0.0 && c.max_bisections >= 1,
            "calibration tolerance, yaw limit and bisections must be positive",
        )?;
        check(
            a.home_deg.iter().all(|v| v.is_finite()),
            "arm.home_deg must be finite",
        )?;
        check(
            c.roll_fixed_deg.is_finite() && c.probe_offsets_cm.iter().all(|v| v.is_finite()),
            "calibration roll and probe offsets must be finite",
        )?;
        let e = &self.experiment;
        check(e.n_shots >= 1, "experiment.n_shots must be >= 1")?;
        check(
            e.target_offset_cm.is_finite(),
            "experiment.target_offset_cm must be finite",
        )?;
        check(
            e.shots_per_row >= 1,
            "experiment.shots_per_row must be >= 1",
        )?;
        check(
            e.draw_length_cm.is_finite() && e.draw_length_cm >= self.bow.brace_distance_cm,
            "experiment.draw_length_cm must be at least the brace distance",
        )?;
        for row in &e.table {
            check(
                row.draw_length_cm >= self.bow.brace_distance_cm && row.roll_deg.abs() < 90.0,
                "table rows need draw length >= brace and |roll| < 90",
            )?;
            if let Some(r) = row.range_m {
                check(r > 0.0, "table range_m must be positive")?;
            }
        }
        Ok(())
    }

    pub fn camera(&self) -> PinholeCamera {
        PinholeCamera {
            focal_px: self.camera.focal_px,
            width: self.camera.width_px,
            height: self.camera.height_px,
            mount_height: cm_to_m(self.camera.mount_height_cm),
        }
    }

    pub fn scene(&self) -> Result<Scene, HarnessError> {
        let s = &self.scene;
        let scene = Scene {
            wall_distance: s.wall_distance_m,
            target_height: cm_to_m(s.target_height_cm),
            target_diameter: cm_to_m(s.target_diameter_cm),
            inner_ring_diameter: cm_to_m(s.inner_ring_diameter_cm),
            ring_width: cm_to_m(s.ring_width_cm),
            camera: self.camera(),
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn ring_style(&self) -> super::RingStyle {
        super::RingStyle {
            background: self.scene.background_level,
            ink: self.scene.ink_level,
        }
    }

    pub fn bow(&self) -> BowModel {
        let b = &self.bow;
        BowModel {
            rated_draw_force: b.rated_draw_force_n,
            rated_draw_length: cm_to_m(b.rated_draw_length_cm),
            brace_distance: cm_to_m(b.brace_distance_cm),
            efficiency: b.efficiency,
            arrow_mass: b.arrow_mass_g / 1000.0,
        }
    }

    pub fn flight(&self, wall: bool) -> FlightSetup {
        FlightSetup {
            bow: self.bow(),
            release_height: cm_to_m(self.ballistics.release_height_cm),
            drag_coefficient: self.ballistics.drag_coefficient,
            wall_distance: wall.then_some(self.scene.wall_distance_m),
            dt: self.ballistics.dt_s,
        }
    }

    /// Launch template carrying release height and drag.
    pub fn launch_template(&self) -> LaunchState {
        LaunchState {
            release_height: cm_to_m(self.ballistics.release_height_cm),
            drag_coefficient: self.ballistics.drag_coefficient,
            ..LaunchState::default()
        }
    }

    pub fn noise(&self, seed: u64) -> NoiseModel {
        NoiseModel {
            sigma_yaw: deg_to_rad(self.noise.sigma_yaw_deg),
            sigma_roll: deg_to_rad(self.noise.sigma_roll_deg),
            base_drift_per_shot: deg_to_rad(self.noise.drift_deg_per_shot),
            rng_seed: seed,
        }
    }

    pub fn ik(&self) -> IkConfig {
        let a = &self.arm;
        IkConfig {
            max_iterations: a.ik_max_iterations,
            position_tolerance: cm_to_m(a.ik_position_tolerance_cm),
            orientation_tolerance: deg_to_rad(a.ik_orientation_tolerance_deg),
            damping: a.ik_damping,
            step_scale: a.ik_step_scale,
        }
    }

    pub fn rig(&self) -> Result<Rig, HarnessError> {
        let a = &self.arm;
        let arm = match &a.description {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
                ArmModel::from_toml_str(&text).map_err(|e| HarnessError::Config(e.to_string()))?
            }
            None => ArmModel::default_right_arm(),
        };
        if a.home_deg.len() != arm.n_joints() {
            return Err(HarnessError::Config(format!(
                "arm.home_deg has {} entries, arm has {} joints",
                a.home_deg.len(),
                arm.n_joints()
            )));
        }
        let [x, y, z] = a.left_gripper_cm.map(cm_to_m);
        Ok(Rig {
            arm,
            left_gripper: Vec3::new(x, y, z),
            home: JointVector(a.home_deg.iter().copied().map(deg_to_rad).collect()),
            ik: self.ik(),
            waypoints: a.waypoints,
        })
    }

    pub fn calibration_plan(&self) -> CalibrationPlan {
        let c = &self.calibration;
        CalibrationPlan {
            shots_per_probe: c.shots_per_probe,
            probe_offsets: c.probe_offsets_cm.iter().copied().map(cm_to_m).collect(),
            roll_fixed: deg_to_rad(c.roll_fixed_deg),
            draw_length: cm_to_m(self.experiment.draw_length_cm),
            lateral_tolerance: cm_to_m(c.tolerance_cm),
            yaw_limit: deg_to_rad(c.yaw_limit_deg),
            max_bisections: c.max_bisections,
        }
    }

    pub fn observations(&self) -> Vec<RangeObservation> {
        self.experiment
            .table
            .iter()
            .filter_map(TableRow::observation)
            .collect()
    }

    pub fn fit_grid(&self) -> FitGrid {
        FitGrid::default()
    }
}

/// Table rows in config form for the built-in range measurements.
pub fn default_table() -> Vec<TableRow> {
    RANGE_TABLE
        .iter()
        .map(|o| TableRow {
            draw_length_cm: o.draw_length * 100.0,
            roll_deg: rad_to_deg(o.roll),
            range_m: Some(o.range),
        })
        .collect()
}
