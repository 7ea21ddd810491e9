use nalgebra::{Matrix6xX, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use super::KinematicsError;
use crate::geometry::{wrap_angle, Vec3};

/// One revolute joint: rotate about `axis` (in the parent frame), then
/// translate by `offset` (in the rotated frame) to reach the next joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Joint {
    #[serde(default)]
    pub name: String,
    pub axis: [f64; 3],
    pub offset: [f64; 3],
    pub limits: [f64; 2],
}

/// Serial chain of revolute joints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmModel {
    #[serde(default)]
    pub name: String,
    #[serde(rename = "joint")]
    joints: Vec<Joint>,
}

impl ArmModel {
    pub fn new(name: impl Into<String>, joints: Vec<Joint>) -> Result<Self, KinematicsError> {
        let arm = Self {
            name: name.into(),
            joints,
        };
        arm.validate()?;
        Ok(arm)
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        if self.joints.is_empty() {
            return Err(KinematicsError::InvalidArm(
                "arm needs at least one joint".into(),
            ));
        }
        for (i, j) in self.joints.iter().enumerate() {
            let a = Vector3::from(j.axis);
            if !a.iter().all(|v| v.is_finite()) || (a.norm() - 1.0).abs() > 1e-9 {
                return Err(KinematicsError::InvalidArm(format!(
                    "joint {i} axis {:?} is not unit length",
                    j.axis
                )));
            }
            if !j.offset.iter().all(|v| v.is_finite()) {
                return Err(KinematicsError::InvalidArm(format!(
                    "joint {i} offset not finite"
                )));
            }
            let [lo, hi] = j.limits;
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(KinematicsError::InvalidArm(format!(
                    "joint {i} limits {lo}..{hi} invalid"
                )));
            }
        }
        Ok(())
    }

    /// Parses the TOML arm description; unknown keys are rejected.
    pub fn from_toml_str(s: &str) -> Result<Self, KinematicsError> {
        let arm: ArmModel =
            toml::from_str(s).map_err(|e| KinematicsError::InvalidArm(e.to_string()))?;
        arm.validate()?;
        Ok(arm)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("arm model serializes")
    }

    /// The 7-DoF right arm every experiment runs on.
    pub fn default_right_arm() -> Self {
        Self::from_toml_str(include_str!("../../data/default_arm.toml"))
            .expect("bundled arm description is valid")
    }

    pub fn n_joints(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn reach(&self) -> f64 {
        self.joints
            .iter()
            .map(|j| Vector3::from(j.offset).norm())
            .sum()
    }

    /// Clamps every joint into its limits.
    pub fn clamp(&self, q: &mut JointVector) {
        for (v, j) in q.0.iter_mut().zip(&self.joints) {
            *v = v.clamp(j.limits[0], j.limits[1]);
        }
    }

    pub fn within_limits(&self, q: &JointVector) -> bool {
        q.0.iter()
            .zip(&self.joints)
            .all(|(v, j)| j.limits[0] <= *v && *v <= j.limits[1])
    }

    fn check_dims(&self, q: &JointVector) -> Result<(), KinematicsError> {
        if q.len() != self.n_joints() {
            return Err(KinematicsError::DimensionMismatch {
                expected: self.n_joints(),
                got: q.len(),
            });
        }
        Ok(())
    }

    /// Joint origins, world joint axes, and the end-effector frame.
    fn chain(&self, q: &JointVector) -> (Vec<Vector3<f64>>, Vec<Vector3<f64>>, Frame) {
        let mut rot = Rotation3::identity();
        let mut pos = Vector3::zeros();
        let mut origins = Vec::with_capacity(self.n_joints());
        let mut axes = Vec::with_capacity(self.n_joints());
        for (j, &angle) in self.joints.iter().zip(&q.0) {
            let local_axis = Unit::new_normalize(Vector3::from(j.axis));
            origins.push(pos);
            axes.push(rot * local_axis.into_inner());
            rot *= Rotation3::from_axis_angle(&local_axis, angle);
            pos += rot * Vector3::from(j.offset);
        }
        (
            origins,
            axes,
            Frame {
                rotation: rot,
                position: pos,
            },
        )
    }

    pub fn end_frame(&self, q: &JointVector) -> Result<Frame, KinematicsError> {
        self.check_dims(q)?;
        Ok(self.chain(q).2)
    }

    pub fn forward_kinematics(&self, q: &JointVector) -> Result<Pose, KinematicsError> {
        Ok(self.end_frame(q)?.to_pose())
    }

    /// Geometric Jacobian: rows 0..3 linear velocity, rows 3..6 angular.
    pub fn jacobian(&self, q: &JointVector) -> Result<Matrix6xX<f64>, KinematicsError> {
        self.check_dims(q)?;
        let (origins, axes, end) = self.chain(q);
        let mut jac = Matrix6xX::zeros(self.n_joints());
        for (i, (p, a)) in origins.iter().zip(&axes).enumerate() {
            let lin = a.cross(&(end.position - p));
            jac.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
            jac.fixed_view_mut::<3, 1>(3, i).copy_from(a);
        }
        Ok(jac)
    }
}

/// Joint angles, radians.
#[derive(Debug, Clone, PartialEq)]
pub struct JointVector(pub Vec<f64>);

impl JointVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs_diff(&self, other: &JointVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<f64>> for JointVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Rigid frame as rotation matrix plus position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub rotation: Rotation3<f64>,
    pub position: Vector3<f64>,
}

impl Frame {
    pub fn to_pose(&self) -> Pose {
        let (roll, pitch, yaw) = self.rotation.euler_angles();
        Pose {
            position: self.position.into(),
            yaw: wrap_angle(yaw),
            pitch: wrap_angle(pitch),
            roll: wrap_angle(roll),
        }
    }
}

/// Position plus Z-Y-X intrinsic yaw/pitch/roll.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl Pose {
    pub fn new(position: Vec3, yaw: f64, pitch: f64, roll: f64) -> Self {
        Self {
            position,
            yaw: wrap_angle(yaw),
            pitch: wrap_angle(pitch),
            roll: wrap_angle(roll),
        }
    }

    /// `Rz(yaw) * Ry(pitch) * Rx(roll)`.
    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_euler_angles(self.roll, self.pitch, self.yaw)
    }

    pub fn frame(&self) -> Frame {
        Frame {
            rotation: self.rotation(),
            position: self.position.into(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite()
            && self.yaw.is_finite()
            && self.pitch.is_finite()
            && self.roll.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    pub(crate) fn planar_two_link() -> ArmModel {
        let link = |name: &str| Joint {
            name: name.into(),
            axis: [0.0, 0.0, 1.0],
            offset: [0.3, 0.0, 0.0],
            limits: [-3.1, 3.1],
        };
        ArmModel::new("planar", vec![link("a"), link("b")]).unwrap()
    }

    fn close(p: Vec3, e: [f64; 3]) -> bool {
        (p.x - e[0]).abs() < 1e-12 && (p.y - e[1]).abs() < 1e-12 && (p.z - e[2]).abs() < 1e-12
    }

    #[test]
    fn planar_forward_kinematics() {
        let arm = planar_two_link();
        let fk = |q: Vec<f64>| arm.forward_kinematics(&q.into()).unwrap().position;
        assert!(close(fk(vec![0.0, 0.0]), [0.6, 0.0, 0.0]));
        assert!(close(fk(vec![FRAC_PI_2, 0.0]), [0.0, 0.6, 0.0]));
        // cos/sin of 90 then 0 deg: (0 + 0.3, 0.3 + 0, 0)
        assert!(close(fk(vec![FRAC_PI_2, -FRAC_PI_2]), [0.3, 0.3, 0.0]));
    }

    #[test]
    fn single_link_jacobian() {
        let arm = ArmModel::new(
            "one",
            vec![Joint {
                name: String::new(),
                axis: [0.0, 0.0, 1.0],
                offset: [0.5, 0.0, 0.0],
                limits: [-1.0, 1.0],
            }],
        )
        .unwrap();
        let j = arm.jacobian(&JointVector::zeros(1)).unwrap();
        let col: Vec<f64> = j.column(0).iter().copied().collect();
        assert_eq!(col, vec![0.0, 0.5, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn straight_planar_arm_has_z_angular_rows() {
        let j = planar_two_link().jacobian(&JointVector::zeros(2)).unwrap();
        for c in 0..2 {
            assert_eq!([j[(3, c)], j[(4, c)], j[(5, c)]], [0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let arm = planar_two_link();
        assert!(matches!(
            arm.forward_kinematics(&JointVector::zeros(3)),
            Err(KinematicsError::DimensionMismatch {
                expected: 2,
                got: 3
            })
        ));
        assert!(arm.jacobian(&JointVector::zeros(1)).is_err());
    }

    #[test]
    fn bad_arm_descriptions_are_rejected() {
        assert!(ArmModel::new("empty", vec![]).is_err());
        let skewed = Joint {
            name: String::new(),
            axis: [0.0, 0.0, 1.1],
            offset: [0.0; 3],
            limits: [-1.0, 1.0],
        };
        assert!(ArmModel::new("skew", vec![skewed]).is_err());
        let unknown_key = r#"
            name = "x"
            colour = "red"
            [[joint]]
            axis = [0.0, 0.0, 1.0]
            offset = [0.1, 0.0, 0.0]
            limits = [-1.0, 1.0]
        "#;
        assert!(ArmModel::from_toml_str(unknown_key).is_err());
        let inverted = r#"
            [[joint]]
            axis = [0.0, 0.0, 1.0]
            offset = [0.1, 0.0, 0.0]
            limits = [1.0, -1.0]
        "#;
        assert!(ArmModel::from_toml_str(inverted).is_err());
    }

    #[test]
    fn default_arm_loads_and_round_trips() {
        let arm = ArmModel::default_right_arm();
        assert_eq!(arm.n_joints(), 7);
        assert!((arm.reach() - 0.75).abs() < 1e-12);
        let again = ArmModel::from_toml_str(&arm.to_toml_string()).unwrap();
        assert_eq!(again, arm);
    }

    #[test]
    fn pose_rotation_matches_frame_round_trip() {
        let pose = Pose::new(Vec3::new(0.1, -0.2, 0.3), 0.4, -0.3, 1.2);
        let back = pose.frame().to_pose();
        assert!((back.yaw - pose.yaw).abs() < 1e-12);
        assert!((back.pitch - pose.pitch).abs() < 1e-12);
        assert!((back.roll - pose.roll).abs() < 1e-12);
    }
}
