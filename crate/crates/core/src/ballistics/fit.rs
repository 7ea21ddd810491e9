//! Fitting bow efficiency and drag to measured ranges.

use serde::{Deserialize, Serialize};

use super::{integrate_flight, launch_speed, BallisticsError, BowModel, LaunchState};

/// One long-range shot: draw length (m), roll used as elevation (rad) and the
/// measured horizontal distance (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeObservation {
    pub draw_length: f64,
    pub roll: f64,
    pub range: f64,
}

impl RangeObservation {
    pub const fn new(draw_length: f64, roll: f64, range: f64) -> Self {
        Self {
            draw_length,
            roll,
            range,
        }
    }
}

/// Measured long-range shots: 70 cm at 4 and 10 degrees, 65 cm at 12 degrees.
pub const RANGE_TABLE: [RangeObservation; 3] = [
    RangeObservation::new(0.70, 4.0f64.to_radians(), 44.0),
    RangeObservation::new(0.70, 10.0f64.to_radians(), 55.0),
    RangeObservation::new(0.65, 12.0f64.to_radians(), 50.0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub efficiency: f64,
    pub drag_coefficient: f64,
    /// Predicted minus measured range, one per observation, meters.
    pub residuals: Vec<f64>,
    pub rms: f64,
}

/// Search box and resolution for [`fit_effective_parameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitGrid {
    pub efficiency: (f64, f64),
    pub efficiency_step: f64,
    pub drag: (f64, f64),
    pub drag_step: f64,
    /// Time step for the grid pass; refinement and residuals use the caller's.
    pub coarse_dt: f64,
}

impl Default for FitGrid {
    fn default() -> Self {
        Self {
            efficiency: (0.3, 1.0),
            efficiency_step: 0.01,
            drag: (0.0, 0.02),
            drag_step: 2.5e-4,
            coarse_dt: 1e-3,
        }
    }
}

/// Range predicted for one observation's draw length and roll.
pub fn predicted_range(
    bow: &BowModel,
    template: &LaunchState,
    obs: &RangeObservation,
    dt: f64,
) -> Result<f64, BallisticsError> {
    let launch = LaunchState {
        speed: launch_speed(bow, obs.draw_length)?,
        elevation: obs.roll,
        azimuth: 0.0,
        ..*template
    };
    Ok(integrate_flight(&launch, None, dt)?.range())
}

fn residuals(
    bow: &BowModel,
    template: &LaunchState,
    obs: &[RangeObservation],
    dt: f64,
) -> Result<Vec<f64>, BallisticsError> {
    obs.iter()
        .map(|o| Ok(predicted_range(bow, template, o, dt)? - o.range))
        .collect()
}

fn sse(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn check_observations(obs: &[RangeObservation], min: usize) -> Result<(), BallisticsError> {
    if obs.len() < min {
        return Err(BallisticsError::InvalidInput(format!(
            "need at least {min} observations, got {}",
            obs.len()
        )));
    }
    for o in obs {
        if !(o.draw_length.is_finite()
            && o.roll.is_finite()
            && o.range.is_finite()
            && o.range > 0.0)
        {
            return Err(BallisticsError::InvalidInput(format!(
                "bad observation {o:?}"
            )));
        }
    }
    Ok(())
}

/// Least-squares `(efficiency, drag)` over a grid, then a shrinking pattern
/// search inside the same box. Release height and arrow mass come from
/// `bow` and `template`; their own efficiency and drag are ignored.
pub fn fit_effective_parameters(
    bow: &BowModel,
    template: &LaunchState,
    obs: &[RangeObservation],
    grid: &FitGrid,
    dt: f64,
) -> Result<FitResult, BallisticsError> {
    check_observations(obs, 2)?;
    let cost = |eta: f64, k_d: f64, dt: f64| -> Result<f64, BallisticsError> {
        let b = BowModel {
            efficiency: eta,
            ..bow.clone()
        };
        let t = LaunchState {
            drag_coefficient: k_d,
            ..*template
        };
        Ok(sse(&residuals(&b, &t, obs, dt)?))
    };

    let n_eta =
        ((grid.efficiency.1 - grid.efficiency.0) / grid.efficiency_step + 1e-9).floor() as usize;
    let n_kd = ((grid.drag.1 - grid.drag.0) / grid.drag_step + 1e-9).floor() as usize;
    let mut best = (f64::INFINITY, grid.efficiency.0, grid.drag.0);
    for i in 0..=n_eta {
        let eta = grid.efficiency.0 + i as f64 * grid.efficiency_step;
        for j in 0..=n_kd {
            let k_d = grid.drag.0 + j as f64 * grid.drag_step;
            let c = cost(eta, k_d, grid.coarse_dt)?;
            if c < best.0 {
                best = (c, eta, k_d);
            }
        }
    }

    let (_, mut eta, mut k_d) = best;
    let mut c = cost(eta, k_d, dt)?;
    let (mut se, mut sk) = (grid.efficiency_step, grid.drag_step);
    for _ in 0..40 {
        let mut moved = false;
        for (de, dk) in [(se, 0.0), (-se, 0.0), (0.0, sk), (0.0, -sk)] {
            let e2 = (eta + de).clamp(grid.efficiency.0, grid.efficiency.1);
            let k2 = (k_d + dk).clamp(grid.drag.0, grid.drag.1);
            if (e2, k2) == (eta, k_d) {
                continue;
            }
            let c2 = cost(e2, k2, dt)?;
            if c2 < c {
                (eta, k_d, c) = (e2, k2, c2);
                moved = true;
            }
        }
        if !moved {
            se *= 0.5;
            sk *= 0.5;
        }
    }

    let fitted_bow = BowModel {
        efficiency: eta,
        ..bow.clone()
    };
    let fitted = LaunchState {
        drag_coefficient: k_d,
        ..*template
    };
    let r = residuals(&fitted_bow, &fitted, obs, dt)?;
    Ok(FitResult {
        efficiency: eta,
        drag_coefficient: k_d,
        rms: (sse(&r) / r.len() as f64).sqrt(),
        residuals: r,
    })
}

/// Efficiency reproducing a single observation at fixed drag, by bisection
/// on `(0, 1]`.
pub fn fit_efficiency(
    bow: &BowModel,
    template: &LaunchState,
    obs: &RangeObservation,
    dt: f64,
) -> Result<f64, BallisticsError> {
    check_observations(std::slice::from_ref(obs), 1)?;
    let range_at = |eta: f64| {
        let b = BowModel {
            efficiency: eta,
            ..bow.clone()
        };
        predicted_range(&b, template, obs, dt)
    };
    let (mut lo, mut hi) = (1e-6, 1.0);
    if range_at(hi)? < obs.range {
        return Err(BallisticsError::FitFailed(format!(
            "{} m is out of reach even at efficiency 1",
            obs.range
        )));
    }
    if range_at(lo)? > obs.range {
        return Err(BallisticsError::FitFailed(format!(
            "{} m is shorter than the minimum modelled range",
            obs.range
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if range_at(mid)? < obs.range {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
