//! Point-mass arrow flight with quadratic drag.
//!
//! Drag acts along the velocity, so the trajectory stays in the vertical plane
//! containing the launch direction. It is integrated in that plane as `(s, z)`
//! (horizontal distance, height) and rotated by the azimuth afterwards.
//! Crossings of the ground and of the wall are located inside the final step
//! with the cubic Hermite interpolant built from positions and velocities at
//! both ends, which keeps the overall scheme fourth order.

use serde::{Deserialize, Serialize};

use super::BallisticsError;

pub const GRAVITY: f64 = 9.80665;

/// Flights longer than this are treated as a runaway configuration.
const MAX_FLIGHT_TIME: f64 = 600.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaunchState {
    /// m/s.
    pub speed: f64,
    /// Radians above horizontal.
    pub elevation: f64,
    /// Radians, positive to the right.
    pub azimuth: f64,
    /// Meters above ground.
    pub release_height: f64,
    /// 1/m; deceleration is `k_d * |v|^2`.
    pub drag_coefficient: f64,
}

impl Default for LaunchState {
    fn default() -> Self {
        Self {
            speed: 0.0,
            elevation: 0.0,
            azimuth: 0.0,
            release_height: 1.30,
            drag_coefficient: 0.003,
        }
    }
}

impl LaunchState {
    pub fn validate(&self) -> Result<(), BallisticsError> {
        let all_finite = [
            self.speed,
            self.elevation,
            self.azimuth,
            self.release_height,
            self.drag_coefficient,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(BallisticsError::InvalidInput(
                "non-finite launch state".into(),
            ));
        }
        if !(self.speed > 0.0) {
            return Err(BallisticsError::InvalidInput(format!(
                "launch speed must be positive, got {}",
                self.speed
            )));
        }
        if self.release_height < 0.0 || self.drag_coefficient < 0.0 {
            return Err(BallisticsError::InvalidInput(
                "release height and drag coefficient must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Where the arrow met the wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallImpact {
    /// Meters above ground.
    pub height: f64,
    /// Meters, positive to the right.
    pub lateral: f64,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandingPoint {
    /// Downrange, meters.
    pub x: f64,
    /// Lateral, meters, positive to the right.
    pub y: f64,
    pub flight_time: f64,
    pub wall: Option<WallImpact>,
}

impl LandingPoint {
    /// Horizontal distance from the launch point.
    pub fn range(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// One point of a sampled trajectory, world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightSample {
    pub t: f64,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
}

/// Planar state `(s, z, vs, vz)`.
type State = [f64; 4];

fn deriv(y: &State, k_d: f64) -> State {
    let speed = y[2].hypot(y[3]);
    [
        y[2],
        y[3],
        -k_d * speed * y[2],
        -GRAVITY - k_d * speed * y[3],
    ]
}

fn rk4_step(y: &State, h: f64, k_d: f64) -> State {
    let add = |a: &State, b: &State, s: f64| -> State {
        [
            a[0] + s * b[0],
            a[1] + s * b[1],
            a[2] + s * b[2],
            a[3] + s * b[3],
        ]
    };
    let k1 = deriv(y, k_d);
    let k2 = deriv(&add(y, &k1, h / 2.0), k_d);
    let k3 = deriv(&add(y, &k2, h / 2.0), k_d);
    let k4 = deriv(&add(y, &k3, h), k_d);
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Cubic Hermite on `[0, 1]` with endpoint values `p0, p1` and derivatives
/// (already scaled by the step) `m0, m1`.
fn hermite(p0: f64, m0: f64, p1: f64, m1: f64, u: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * p0
        + (u3 - 2.0 * u2 + u) * m0
        + (-2.0 * u3 + 3.0 * u2) * p1
        + (u3 - u2) * m1
}

/// Fraction of the step where the interpolant of component `c` reaches
/// `level`. Assumes the endpoints bracket it.
fn crossing(a: &State, b: &State, h: f64, c: usize, level: f64) -> f64 {
    let f = |u: f64| hermite(a[c], h * a[c + 2], b[c], h * b[c + 2], u) - level;
    let (mut lo, mut hi) = (0.0, 1.0);
    let flo = f(lo);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn interp(a: &State, b: &State, h: f64, c: usize, u: f64) -> f64 {
    hermite(a[c], h * a[c + 2], b[c], h * b[c + 2], u)
}

fn check_dt(dt: f64) -> Result<(), BallisticsError> {
    if dt > 0.0 && dt <= 0.01 {
        Ok(())
    } else {
        Err(BallisticsError::InvalidInput(format!(
            "time step must be in (0, 0.01] s, got {dt}"
        )))
    }
}

fn initial_state(launch: &LaunchState) -> State {
    let (se, ce) = launch.elevation.sin_cos();
    [
        0.0,
        launch.release_height,
        launch.speed * ce,
        launch.speed * se,
    ]
}

/// Integrates until the arrow reaches the ground.
///
/// The wall is the set of points at horizontal distance `wall_distance` from
/// the launch point, so every shot meets it head-on regardless of azimuth.
pub fn integrate_flight(
    launch: &LaunchState,
    wall_distance: Option<f64>,
    dt: f64,
) -> Result<LandingPoint, BallisticsError> {
    launch.validate()?;
    check_dt(dt)?;
    if let Some(d) = wall_distance {
        if !(d.is_finite() && d > 0.0) {
            return Err(BallisticsError::InvalidInput(format!(
                "wall distance must be positive, got {d}"
            )));
        }
    }
    let (sa, ca) = launch.azimuth.sin_cos();
    let k_d = launch.drag_coefficient;
    let mut y = initial_state(launch);
    let mut t = 0.0;
    let mut wall = None;
    loop {
        let next = rk4_step(&y, dt, k_d);
        if let (Some(d), None) = (wall_distance, wall) {
            if y[0] < d && next[0] >= d {
                let u = crossing(&y, &next, dt, 0, d);
                let z = interp(&y, &next, dt, 1, u);
                if z >= 0.0 {
                    wall = Some(WallImpact {
                        height: z,
                        lateral: d * sa,
                        time: t + u * dt,
                    });
                }
            }
        }
        if next[1] < 0.0 {
            let u = crossing(&y, &next, dt, 1, 0.0);
            let s = interp(&y, &next, dt, 0, u);
            return Ok(LandingPoint {
                x: s * ca,
                y: s * sa,
                flight_time: t + u * dt,
                wall,
            });
        }
        y = next;
        t += dt;
        if t > MAX_FLIGHT_TIME {
            return Err(BallisticsError::NoLanding(MAX_FLIGHT_TIME));
        }
    }
}

/// Trajectory samples every `stride` steps, ending at the last step above
/// ground. Used for plotting and energy audits.
pub fn sample_trajectory(
    launch: &LaunchState,
    dt: f64,
    stride: usize,
) -> Result<Vec<FlightSample>, BallisticsError> {
    launch.validate()?;
    check_dt(dt)?;
    let stride = stride.max(1);
    let (sa, ca) = launch.azimuth.sin_cos();
    let to_sample = |t: f64, y: &State| FlightSample {
        t,
        position: [y[0] * ca, y[0] * sa, y[1]],
        velocity: [y[2] * ca, y[2] * sa, y[3]],
    };
    let mut y = initial_state(launch);
    let mut t = 0.0;
    let mut out = vec![to_sample(t, &y)];
    let mut step = 0usize;
    loop {
        let next = rk4_step(&y, dt, launch.drag_coefficient);
        if next[1] < 0.0 {
            if step % stride != 0 {
                out.push(to_sample(t, &y));
            }
            return Ok(out);
        }
        y = next;
        t += dt;
        step += 1;
        if step % stride == 0 {
            out.push(to_sample(t, &y));
        }
        if t > MAX_FLIGHT_TIME {
            return Err(BallisticsError::NoLanding(MAX_FLIGHT_TIME));
        }
    }
}
