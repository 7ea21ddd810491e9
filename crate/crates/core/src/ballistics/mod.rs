//! Bow energy model, arrow flight and parameter fitting.

mod bow;
mod fit;
mod flight;

use thiserror::Error;

pub use bow::{launch_speed, BowModel};
pub use fit::{
    fit_effective_parameters, fit_efficiency, predicted_range, FitGrid, FitResult,
    RangeObservation, RANGE_TABLE,
};
pub use flight::{
    integrate_flight, sample_trajectory, FlightSample, LandingPoint, LaunchState, WallImpact,
    GRAVITY,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BallisticsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid bow or flight config: {0}")]
    InvalidConfig(String),
    #[error("arrow still airborne after {0} s")]
    NoLanding(f64),
    #[error("fit failed: {0}")]
    FitFailed(String),
}
