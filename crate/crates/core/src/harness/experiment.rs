//! The three shooting experiments against a simulated wall and camera.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{add_gaussian_noise, render_target, Config, HarnessError, RingStyle, Scene};
use crate::ballistics::{fit_effective_parameters, fit_efficiency, FitResult, RangeObservation};
use crate::controller::{
    aim_from_detection, calibrate, CalibrationReport, NoiseModel, ShootState, ShootingSession,
    ShotRecord, TargetWorld,
};
use crate::geometry::{cm_to_m, deg_to_rad, AimState};
use crate::vision::{detect_target, DetectorConfig, GrayImage};

/// Wall, target and camera. Each capture renders the target where it hangs
/// and adds pixel noise from the world's own stream.
#[derive(Debug, Clone)]
pub struct SimWorld {
    scene: Scene,
    style: RingStyle,
    pixel_noise_sigma: f64,
    rng: ChaCha8Rng,
    target: (f64, f64),
}

impl SimWorld {
    pub fn new(scene: Scene, style: RingStyle, pixel_noise_sigma: f64, seed: u64) -> Self {
        let target = (0.0, scene.target_height);
        Self {
            scene,
            style,
            pixel_noise_sigma,
            rng: ChaCha8Rng::seed_from_u64(seed),
            target,
        }
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    /// `(lateral, height)` of the target center, meters.
    pub fn target(&self) -> (f64, f64) {
        self.target
    }

    pub fn render(&mut self) -> Result<GrayImage, HarnessError> {
        let mut img = render_target(&self.scene, self.target.0, self.target.1, self.style)?;
        if self.pixel_noise_sigma > 0.0 {
            add_gaussian_noise(&mut img, self.pixel_noise_sigma, &mut self.rng);
        }
        Ok(img)
    }
}

impl TargetWorld for SimWorld {
    fn place_target(&mut self, lateral: f64, height: f64) {
        self.target = (lateral, height);
    }

    fn capture(&mut self) -> Result<GrayImage, String> {
        self.render().map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    /// Fixed zero yaw and roll, impacts on the wall.
    Repeatability,
    /// Detect, aim and shoot at a displaced target.
    VisionAiming,
    /// Draw length and roll sweep without a wall.
    LongRange,
}

impl ExperimentKind {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Self::Repeatability),
            2 => Some(Self::VisionAiming),
            3 => Some(Self::LongRange),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Self::Repeatability => 1,
            Self::VisionAiming => 2,
            Self::LongRange => 3,
        }
    }
}

/// Per-axis statistics over the released shots, meters. Axes are
/// `(lateral, height)` at the wall, or `(downrange, lateral)` on the ground
/// when there is no wall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub released: usize,
    pub faulted: usize,
    pub mean: [f64; 2],
    /// Sample variance, zero for fewer than two points.
    pub variance: [f64; 2],
    /// `max - min` per axis.
    pub spread: [f64; 2],
    pub max_pairwise: f64,
}

impl Summary {
    pub fn from_points(points: &[[f64; 2]], faulted: usize) -> Self {
        let n = points.len();
        let mut mean = [0.0; 2];
        let mut variance = [0.0; 2];
        let mut spread = [0.0; 2];
        if n > 0 {
            for a in 0..2 {
                let vals = points.iter().map(|p| p[a]);
                // Shifted by the first value so identical points give exactly
                // zero variance and their own value as the mean.
                let x0 = points[0][a];
                let s1: f64 = vals.clone().map(|v| v - x0).sum();
                let s2: f64 = vals.clone().map(|v| (v - x0).powi(2)).sum();
                mean[a] = x0 + s1 / n as f64;
                if n > 1 {
                    variance[a] = ((s2 - s1 * s1 / n as f64) / (n - 1) as f64).max(0.0);
                }
                let lo = vals.clone().fold(f64::INFINITY, f64::min);
                let hi = vals.fold(f64::NEG_INFINITY, f64::max);
                spread[a] = hi - lo;
            }
        }
        let mut max_pairwise: f64 = 0.0;
        for (i, p) in points.iter().enumerate() {
            for q in &points[i + 1..] {
                max_pairwise = max_pairwise.max((p[0] - q[0]).hypot(p[1] - q[1]));
            }
        }
        Self {
            released: n,
            faulted,
            mean,
            variance,
            spread,
            max_pairwise,
        }
    }

    pub fn of_records(records: &[ShotRecord], wall: bool) -> Self {
        let points: Vec<[f64; 2]> = records
            .iter()
            .filter(|r| r.released())
            .filter_map(|r| {
                if wall {
                    r.wall_impact().map(|(l, h)| [l, h])
                } else {
                    r.landing.map(|p| [p.x, p.y])
                }
            })
            .collect();
        let faulted = records
            .iter()
            .filter(|r| r.state == ShootState::Fault)
            .count();
        Self::from_points(&points, faulted)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub records: Vec<ShotRecord>,
    pub summary: Summary,
    /// Target center `(lateral, height)` on the wall, meters.
    pub target: Option<(f64, f64)>,
    pub calibration: Option<CalibrationReport>,
    /// Effective bow parameters used for the sweep.
    pub fit: Option<FitResult>,
}

impl ExperimentOutcome {
    /// Mean absolute lateral distance from the target over released shots.
    pub fn mean_lateral_error(&self) -> Option<f64> {
        let (tl, _) = self.target?;
        let errs: Vec<f64> = self
            .records
            .iter()
            .filter_map(|r| r.wall_impact())
            .map(|(l, _)| (l - tl).abs())
            .collect();
        (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64)
    }
}

/// Independent streams derived from the run seed. Adding a stream later
/// must append here so existing ones keep their values.
struct Seeds {
    shots: u64,
    image: u64,
    calibration: u64,
}

impl Seeds {
    fn derive(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            shots: rng.next_u64(),
            image: rng.next_u64(),
            calibration: rng.next_u64(),
        }
    }
}

fn session(cfg: &Config, wall: bool, noise: NoiseModel) -> Result<ShootingSession, HarnessError> {
    ShootingSession::new(cfg.rig()?, cfg.flight(wall), noise)
        .map_err(|e| HarnessError::Config(e.to_string()))
}

fn aim(theta: f64, phi: f64, draw_length: f64) -> Result<AimState, HarnessError> {
    AimState::new(theta, phi, draw_length).map_err(|e| HarnessError::Config(e.to_string()))
}

pub fn run_experiment(
    cfg: &Config,
    kind: ExperimentKind,
    seed: u64,
) -> Result<ExperimentOutcome, HarnessError> {
    cfg.validate()?;
    let seeds = Seeds::derive(seed);
    let draw = cm_to_m(cfg.experiment.draw_length_cm);
    let n = cfg.experiment.n_shots;
    let mut outcome = ExperimentOutcome {
        kind,
        seed,
        records: Vec::new(),
        summary: Summary::from_points(&[], 0),
        target: None,
        calibration: None,
        fit: None,
    };

    match kind {
        ExperimentKind::Repeatability => {
            let mut s = session(cfg, true, cfg.noise(seeds.shots))?;
            let a = aim(0.0, 0.0, draw)?;
            outcome.records = (0..n).map(|_| s.execute_shot(a, None)).collect();
            outcome.summary = Summary::of_records(&outcome.records, true);
        }
        ExperimentKind::VisionAiming => {
            run_vision(cfg, &seeds, draw, &mut outcome)?;
            outcome.summary = Summary::of_records(&outcome.records, true);
        }
        ExperimentKind::LongRange => {
            let fit = fit_table(cfg)?;
            let mut sweep_cfg = cfg.clone();
            if let Some(f) = &fit {
                sweep_cfg.bow.efficiency = f.efficiency;
                sweep_cfg.ballistics.drag_coefficient = f.drag_coefficient;
            }
            let mut s = session(&sweep_cfg, false, cfg.noise(seeds.shots))?;
            for row in &cfg.experiment.table {
                let a = aim(0.0, deg_to_rad(row.roll_deg), cm_to_m(row.draw_length_cm))?;
                for _ in 0..cfg.experiment.shots_per_row {
                    outcome.records.push(s.execute_shot(a, None));
                }
            }
            outcome.fit = fit;
            outcome.summary = Summary::of_records(&outcome.records, false);
        }
    }
    Ok(outcome)
}

fn run_vision(
    cfg: &Config,
    seeds: &Seeds,
    draw: f64,
    outcome: &mut ExperimentOutcome,
) -> Result<(), HarnessError> {
    let plan = cfg.calibration_plan();
    let scene = cfg.scene()?;
    let mut world = SimWorld::new(
        scene,
        cfg.ring_style(),
        cfg.camera.pixel_noise_sigma,
        seeds.image,
    );

    // The target hangs at the nominal impact of a zero-yaw shot, moved
    // sideways. That height keeps the fixed roll on target.
    let mut nominal = session(cfg, true, NoiseModel::none(0))?;
    let probe = nominal.execute_shot(aim(0.0, plan.roll_fixed, draw)?, None);
    let (lat0, h0) = probe.wall_impact().ok_or_else(|| {
        HarnessError::Config(match &probe.fault {
            Some(f) => format!("nominal shot faulted: {f}"),
            None => "nominal shot does not reach the wall".into(),
        })
    })?;
    let target = (lat0 + cm_to_m(cfg.experiment.target_offset_cm), h0);
    outcome.target = Some(target);

    let cal = if cfg.calibration.enabled {
        let mut cal_session = session(cfg, true, cfg.noise(seeds.calibration))?;
        let report = calibrate(&mut cal_session, &mut world, &cfg.detector, &plan)
            .map_err(|e| HarnessError::Calibration(e.to_string()))?;
        let c = report.calibration;
        outcome.calibration = Some(report);
        Some(c)
    } else {
        None
    };

    world.place_target(target.0, target.1);
    let mut s = session(cfg, true, cfg.noise(seeds.shots))?;
    for _ in 0..cfg.experiment.n_shots {
        let record = match &cal {
            None => s.execute_shot(aim(0.0, plan.roll_fixed, draw)?, None),
            Some(c) => {
                let img = world.render()?;
                match locate(&img, &cfg.detector) {
                    Ok((x, y)) => {
                        let (theta, phi) = aim_from_detection(x, c);
                        match AimState::new(theta, phi, draw) {
                            Ok(a) => s.execute_shot(a, Some((x, y))),
                            Err(e) => s.abort_shot(aim(0.0, phi, draw)?, format!("aim: {e}")),
                        }
                    }
                    Err(cause) => s.abort_shot(aim(0.0, c.roll_fixed, draw)?, cause),
                }
            }
        };
        outcome.records.push(record);
    }
    Ok(())
}

fn locate(img: &GrayImage, detector: &DetectorConfig) -> Result<(f64, f64), String> {
    match detect_target(img, detector) {
        Ok(Some(d)) => Ok((d.center.0 as f64, d.center.1 as f64)),
        Ok(None) => Err("target not detected".into()),
        Err(e) => Err(format!("detection: {e}")),
    }
}

/// Effective efficiency and drag from the measured rows of the table, or
/// `None` when fitting is off or there is nothing to fit.
pub fn fit_table(cfg: &Config) -> Result<Option<FitResult>, HarnessError> {
    let obs: Vec<RangeObservation> = cfg.observations();
    if !cfg.experiment.fit_table || obs.is_empty() {
        return Ok(None);
    }
    let bow = cfg.bow();
    let template = cfg.launch_template();
    let dt = cfg.ballistics.dt_s;
    let fail = |e: crate::ballistics::BallisticsError| HarnessError::Config(e.to_string());
    if obs.len() == 1 {
        let efficiency = fit_efficiency(&bow, &template, &obs[0], dt).map_err(fail)?;
        let b = crate::ballistics::BowModel { efficiency, ..bow };
        let r = crate::ballistics::predicted_range(&b, &template, &obs[0], dt).map_err(fail)?
            - obs[0].range;
        return Ok(Some(FitResult {
            efficiency,
            drag_coefficient: template.drag_coefficient,
            residuals: vec![r],
            rms: r.abs(),
        }));
    }
    fit_effective_parameters(&bow, &template, &obs, &cfg.fit_grid(), dt)
        .map(Some)
        .map_err(fail)
}
