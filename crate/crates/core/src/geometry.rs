//! Draw-vector geometry in the left-gripper frame.
//!
//! The frame is anchored on the left (bow) gripper: Z points up and is the yaw
//! axis, X is the roll axis, and Y is the draw direction when the gripper is
//! level. A point at distance `D_L` along the draw vector is offset from the
//! left gripper by
//!
//! ```text
//! dX = sin(theta) * D_L
//! dY = cos(theta) * cos(phi) * D_L
//! dZ = sin(-phi) * D_L
//! ```
//!
//! All quantities are SI (meters, radians). Degrees and centimeters only
//! appear at the I/O boundary through the conversion helpers below.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Yaw offset of the drawing (right) gripper relative to the bow gripper.
pub const RIGHT_GRIPPER_YAW_OFFSET: f64 = -FRAC_PI_2;

/// Distance from the arrow rest to the string at rest, meters.
pub const BRACE_DISTANCE: f64 = 0.22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("non-finite vector component")]
    NonFinite,
    #[error("draw length must be >= 0, got {0}")]
    NegativeDrawLength(f64),
    #[error("yaw {0} rad outside [-pi, pi]")]
    YawOutOfRange(f64),
    #[error("roll {0} rad outside [-pi/2, pi/2]")]
    RollOutOfRange(f64),
}

/// Cartesian point or displacement, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Checked constructor; rejects NaN and infinities.
    pub fn try_new(x: f64, y: f64, z: f64) -> Result<Self, GeometryError> {
        if x.is_finite() && y.is_finite() && z.is_finite() {
            Ok(Self { x, y, z })
        } else {
            Err(GeometryError::NonFinite)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<nalgebra::Vector3<f64>> for Vec3 {
    fn from(v: nalgebra::Vector3<f64>) -> Self {
        Vec3::new(v.x, v.y, v.z)
    }
}

impl From<Vec3> for nalgebra::Vector3<f64> {
    fn from(v: Vec3) -> Self {
        nalgebra::Vector3::new(v.x, v.y, v.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Bow-gripper orientation plus draw length: everything that parameterizes a
/// shot. `theta` is yaw about Z, `phi` is roll about X, `draw_length` is the
/// distance from the left gripper along the draw vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AimState {
    pub theta: f64,
    pub phi: f64,
    pub draw_length: f64,
}

impl AimState {
    pub fn new(theta: f64, phi: f64, draw_length: f64) -> Result<Self, GeometryError> {
        let aim = Self {
            theta,
            phi,
            draw_length,
        };
        aim.validate()?;
        Ok(aim)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.theta.is_finite() && self.phi.is_finite() && self.draw_length.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if self.draw_length < 0.0 {
            return Err(GeometryError::NegativeDrawLength(self.draw_length));
        }
        if self.theta.abs() > PI {
            return Err(GeometryError::YawOutOfRange(self.theta));
        }
        if self.phi.abs() > FRAC_PI_2 {
            return Err(GeometryError::RollOutOfRange(self.phi));
        }
        Ok(())
    }

    /// Same orientation, different draw length.
    pub fn with_draw_length(&self, draw_length: f64) -> Self {
        Self {
            draw_length,
            ..*self
        }
    }
}

/// Offset of the point at `aim.draw_length` along the draw vector, relative to
/// the left gripper.
pub fn draw_delta(aim: &AimState) -> Vec3 {
    let d = aim.draw_length;
    Vec3::new(
        aim.theta.sin() * d,
        aim.theta.cos() * aim.phi.cos() * d,
        (-aim.phi).sin() * d,
    )
}

/// Where the right gripper must be to sit on the draw vector at
/// `aim.draw_length`, given the left gripper position.
pub fn right_gripper_target(left_pos: Vec3, aim: &AimState) -> Vec3 {
    left_pos + draw_delta(aim)
}

pub fn deg_to_rad(deg: f64) -> f64 {
    deg.to_radians()
}

pub fn rad_to_deg(rad: f64) -> f64 {
    rad.to_degrees()
}

pub fn cm_to_m(cm: f64) -> f64 {
    cm / 100.0
}

pub fn m_to_cm(m: f64) -> f64 {
    m * 100.0
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}
