//! Damped-least-squares inverse kinematics.
//!
//! Each iteration computes the 6-D pose error `e` (position difference and the
//! rotation vector of `R_target * R_current^T`) and steps
//! `q <- clamp(q + alpha * J^T (J J^T + lambda^2 I)^-1 e)`.
//! For chains with fewer than six joints the equivalent n x n form
//! `(J^T J + lambda^2 I)^-1 J^T e` is factored instead.

use nalgebra::{DMatrix, DVector, Matrix6, Matrix6xX, UnitQuaternion, Vector6};
use serde::{Deserialize, Serialize};

use super::{ArmModel, Frame, JointVector, KinematicsError, Pose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IkConfig {
    pub max_iterations: usize,
    /// Meters.
    pub position_tolerance: f64,
    /// Radians.
    pub orientation_tolerance: f64,
    pub damping: f64,
    pub step_scale: f64,
}

impl Default for IkConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            position_tolerance: 1e-4,
            orientation_tolerance: 1e-3,
            damping: 1e-3,
            step_scale: 0.5,
        }
    }
}

impl IkConfig {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        let ok = self.max_iterations > 0
            && self.position_tolerance > 0.0
            && self.orientation_tolerance > 0.0
            && self.damping > 0.0
            && self.step_scale > 0.0;
        if ok {
            Ok(())
        } else {
            Err(KinematicsError::InvalidConfig(
                "IK parameters must all be positive".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IkReport {
    pub converged: bool,
    pub iterations: usize,
    pub position_error: f64,
    pub orientation_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IkSolution {
    pub q: JointVector,
    pub report: IkReport,
}

/// Linear error stacked over the rotation-vector error.
pub fn pose_error(current: &Frame, target: &Frame) -> Vector6<f64> {
    let dp = target.position - current.position;
    // Via a quaternion: the matrix route takes acos of a trace that rounding
    // can push past 3 near identity.
    let rel = target.rotation * current.rotation.inverse();
    let dr = UnitQuaternion::from_rotation_matrix(&rel).scaled_axis();
    Vector6::new(dp.x, dp.y, dp.z, dr.x, dr.y, dr.z)
}

/// `J^+_lambda * e` without the step scale.
pub fn damped_step(jac: &Matrix6xX<f64>, err: &Vector6<f64>, damping: f64) -> DVector<f64> {
    let n = jac.ncols();
    let lambda2 = damping * damping;
    if n >= 6 {
        let jjt: Matrix6<f64> = jac * jac.transpose() + Matrix6::identity() * lambda2;
        let y = jjt
            .cholesky()
            .map(|c| c.solve(err))
            .unwrap_or_else(|| jjt.lu().solve(err).unwrap_or_else(Vector6::zeros));
        jac.transpose() * y
    } else {
        let jtj: DMatrix<f64> = jac.transpose() * jac + DMatrix::<f64>::identity(n, n) * lambda2;
        let rhs: DVector<f64> = jac.transpose() * err;
        jtj.clone()
            .cholesky()
            .map(|c| c.solve(&rhs))
            .unwrap_or_else(|| jtj.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(n)))
    }
}

pub fn solve_ik(
    arm: &ArmModel,
    q0: &JointVector,
    target: &Pose,
    cfg: &IkConfig,
) -> Result<IkSolution, KinematicsError> {
    cfg.validate()?;
    if !target.is_finite() {
        return Err(KinematicsError::InvalidInput("non-finite IK target".into()));
    }
    let target = target.frame();
    let mut q = q0.clone();
    // Dimension check happens here.
    arm.end_frame(&q)?;
    arm.clamp(&mut q);

    let mut iterations = 0;
    loop {
        let frame = arm.end_frame(&q)?;
        let err = pose_error(&frame, &target);
        let position_error = err.fixed_rows::<3>(0).norm();
        let orientation_error = err.fixed_rows::<3>(3).norm();
        let converged = position_error <= cfg.position_tolerance
            && orientation_error <= cfg.orientation_tolerance;
        if converged || iterations >= cfg.max_iterations {
            return Ok(IkSolution {
                q,
                report: IkReport {
                    converged,
                    iterations,
                    position_error,
                    orientation_error,
                },
            });
        }
        let jac = arm.jacobian(&q)?;
        let dq = damped_step(&jac, &err, cfg.damping);
        for (qi, d) in q.0.iter_mut().zip(dq.iter()) {
            *qi += cfg.step_scale * d;
        }
        arm.clamp(&mut q);
        iterations += 1;
    }
}
