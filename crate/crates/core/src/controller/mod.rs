//! The shooting sequence, aiming calibration and shot noise.

mod calibration;
mod session;
mod state;

use thiserror::Error;

pub use calibration::{
    aim_from_detection, calibrate, compute_gain, Calibration, CalibrationPlan, CalibrationReport,
    ProbeResult, TargetWorld,
};
pub use session::{FlightSetup, NoiseModel, Rig, ShootingSession, ShotRecord};
pub use state::{ShootState, ShotStateMachine};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControllerError {
    #[error("illegal transition {from} -> {to}")]
    IllegalTransition { from: ShootState, to: ShootState },
    #[error("degenerate calibration: {0}")]
    DegenerateCalibration(String),
    #[error("calibration failed: {0}")]
    CalibrationFailed(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
