use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{ShootState, ShotStateMachine};
use crate::ballistics::{integrate_flight, launch_speed, BowModel, LandingPoint, LaunchState};
use crate::geometry::{deg_to_rad, AimState, Vec3, BRACE_DISTANCE};
use crate::kinematics::{track_draw, ArmModel, IkConfig, JointVector, Pose};

/// Right arm plus where the bow hand sits, both in the right-shoulder frame
/// (`x` toward the body midline, `y` backward, `z` up).
#[derive(Debug, Clone, PartialEq)]
pub struct Rig {
    pub arm: ArmModel,
    /// Left gripper (arrow rest) position, meters.
    pub left_gripper: Vec3,
    /// Right-arm configuration the string grip is solved from.
    pub home: JointVector,
    pub ik: IkConfig,
    pub waypoints: usize,
}

impl Default for Rig {
    fn default() -> Self {
        Self {
            arm: ArmModel::default_right_arm(),
            left_gripper: Vec3::new(0.40, -0.70, 0.0),
            home: JointVector(
                [-9.0, 0.0, 0.0, -60.0, 0.0, 0.0, -20.0]
                    .map(deg_to_rad)
                    .to_vec(),
            ),
            ik: IkConfig::default(),
            waypoints: 10,
        }
    }
}

impl Rig {
    /// Left-gripper pose for an aim: yaw and roll from the aim, no pitch.
    pub fn left_pose(&self, aim: &AimState) -> Pose {
        Pose::new(self.left_gripper, aim.theta, 0.0, aim.phi)
    }
}

/// Everything between release and impact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightSetup {
    pub bow: BowModel,
    pub release_height: f64,
    pub drag_coefficient: f64,
    /// Wall distance for impact logging, meters.
    pub wall_distance: Option<f64>,
    /// Integrator step, seconds.
    pub dt: f64,
}

impl Default for FlightSetup {
    fn default() -> Self {
        Self {
            bow: BowModel::default(),
            release_height: 1.30,
            drag_coefficient: 0.003,
            wall_distance: Some(10.0),
            dt: 1e-4,
        }
    }
}

/// Per-shot orientation noise and slow yaw drift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Radians, one standard deviation per shot.
    pub sigma_yaw: f64,
    pub sigma_roll: f64,
    /// Yaw bias added per shot already fired on the session, radians.
    pub base_drift_per_shot: f64,
    pub rng_seed: u64,
}

impl NoiseModel {
    pub fn none(rng_seed: u64) -> Self {
        Self {
            sigma_yaw: 0.0,
            sigma_roll: 0.0,
            base_drift_per_shot: 0.0,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<(), super::ControllerError> {
        let ok = self.sigma_yaw.is_finite()
            && self.sigma_roll.is_finite()
            && self.base_drift_per_shot.is_finite()
            && self.sigma_yaw >= 0.0
            && self.sigma_roll >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(super::ControllerError::InvalidInput(
                "noise sigmas must be finite and >= 0".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotRecord {
    pub shot_index: usize,
    pub commanded: AimState,
    /// Commanded plus sampled noise plus accumulated drift.
    pub realized: AimState,
    pub speed: Option<f64>,
    pub launch: Option<LaunchState>,
    pub landing: Option<LandingPoint>,
    /// Pixel center the aim was derived from, if any.
    pub detection: Option<(f64, f64)>,
    pub state: ShootState,
    pub fault: Option<String>,
}

impl ShotRecord {
    pub fn released(&self) -> bool {
        self.state == ShootState::Released
    }

    /// `(lateral, height)` at the wall, meters.
    pub fn wall_impact(&self) -> Option<(f64, f64)> {
        let w = self.landing?.wall?;
        Some((w.lateral, w.height))
    }
}

/// A robot firing arrows one after another. Drift and the noise stream carry
/// over between shots.
#[derive(Debug, Clone)]
pub struct ShootingSession {
    rig: Rig,
    flight: FlightSetup,
    noise: NoiseModel,
    rng: ChaCha8Rng,
    shots_fired: usize,
}

impl ShootingSession {
    pub fn new(
        rig: Rig,
        flight: FlightSetup,
        noise: NoiseModel,
    ) -> Result<Self, super::ControllerError> {
        noise.validate()?;
        rig.arm
            .validate()
            .and_then(|_| rig.ik.validate())
            .map_err(|e| super::ControllerError::InvalidInput(e.to_string()))?;
        if rig.waypoints == 0 {
            return Err(super::ControllerError::InvalidInput(
                "waypoints must be >= 1".into(),
            ));
        }
        flight
            .bow
            .validate()
            .map_err(|e| super::ControllerError::InvalidInput(e.to_string()))?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(noise.rng_seed),
            rig,
            flight,
            noise,
            shots_fired: 0,
        })
    }

    pub fn rig(&self) -> &Rig {
        &self.rig
    }

    pub fn flight(&self) -> &FlightSetup {
        &self.flight
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn shots_fired(&self) -> usize {
        self.shots_fired
    }

    /// Consumes a shot index and its noise draws. Both draws happen every
    /// shot so the stream does not depend on the configured sigmas.
    fn next_shot(&mut self, aim: AimState, detection: Option<(f64, f64)>) -> ShotRecord {
        let index = self.shots_fired;
        self.shots_fired += 1;
        let z_yaw: f64 = self.rng.sample(StandardNormal);
        let z_roll: f64 = self.rng.sample(StandardNormal);
        let realized = AimState {
            theta: aim.theta
                + self.noise.sigma_yaw * z_yaw
                + self.noise.base_drift_per_shot * index as f64,
            phi: aim.phi + self.noise.sigma_roll * z_roll,
            draw_length: aim.draw_length,
        };
        ShotRecord {
            shot_index: index,
            commanded: aim,
            realized,
            speed: None,
            launch: None,
            landing: None,
            detection,
            state: ShootState::Nocked,
            fault: None,
        }
    }

    /// Runs the full sequence for one arrow. Failures end in a FAULT record
    /// rather than an error so that experiment runs continue.
    pub fn execute_shot(&mut self, aim: AimState, detection: Option<(f64, f64)>) -> ShotRecord {
        let mut record = self.next_shot(aim, detection);
        let mut sm = ShotStateMachine::new();
        if let Err(cause) = self.run_sequence(&mut sm, &mut record) {
            // Fault is legal from every non-terminal state.
            let _ = sm.fault();
            record.fault = Some(cause);
        }
        record.state = sm.state();
        record
    }

    /// Logs a shot that never left NOCKED, e.g. because the target was not
    /// seen. It still takes an index and advances the noise stream, so later
    /// shots see the same drift and noise as in a run without the fault.
    pub fn abort_shot(&mut self, aim: AimState, cause: impl Into<String>) -> ShotRecord {
        let mut record = self.next_shot(aim, None);
        let mut sm = ShotStateMachine::new();
        let _ = sm.fault();
        record.state = sm.state();
        record.fault = Some(cause.into());
        record
    }

    fn run_sequence(
        &self,
        sm: &mut ShotStateMachine,
        record: &mut ShotRecord,
    ) -> Result<(), String> {
        let step = |sm: &mut ShotStateMachine| sm.advance().map(|_| ()).map_err(|e| e.to_string());
        let aim = record.commanded;

        aim.validate().map_err(|e| format!("invalid aim: {e}"))?;
        if aim.draw_length < BRACE_DISTANCE {
            return Err(format!(
                "invalid aim: draw length {} m below brace distance",
                aim.draw_length
            ));
        }
        step(sm)?;

        let rig = &self.rig;
        let left = rig.left_pose(&aim);
        let grip = track_draw(
            &rig.arm,
            &rig.home,
            &left,
            &aim.with_draw_length(BRACE_DISTANCE),
            1,
            &rig.ik,
        )
        .map_err(|e| format!("grip: {e}"))?;
        step(sm)?;

        track_draw(&rig.arm, &grip[0], &left, &aim, rig.waypoints, &rig.ik)
            .map_err(|e| format!("draw: {e}"))?;
        step(sm)?;

        let speed = launch_speed(&self.flight.bow, aim.draw_length).map_err(|e| e.to_string())?;
        record.speed = Some(speed);
        if speed <= 0.0 {
            return Err("no draw, arrow has no launch energy".into());
        }
        let launch = LaunchState {
            speed,
            elevation: record.realized.phi,
            azimuth: record.realized.theta,
            release_height: self.flight.release_height,
            drag_coefficient: self.flight.drag_coefficient,
        };
        record.launch = Some(launch);
        let landing = integrate_flight(&launch, self.flight.wall_distance, self.flight.dt)
            .map_err(|e| format!("flight: {e}"))?;
        record.landing = Some(landing);
        step(sm)
    }
}
