//! Serial-arm forward kinematics and damped-pseudoinverse IK.

mod arm;
mod ik;

use thiserror::Error;

use crate::geometry::{draw_delta, AimState, BRACE_DISTANCE, RIGHT_GRIPPER_YAW_OFFSET};

pub use arm::{ArmModel, Frame, Joint, JointVector, Pose};
pub use ik::{damped_step, pose_error, solve_ik, IkConfig, IkReport, IkSolution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("invalid arm description: {0}")]
    InvalidArm(String),
    #[error("joint vector has {got} entries, arm has {expected} joints")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid IK config: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("draw infeasible: IK did not converge at waypoint {waypoint} (D_L = {draw_length:.4} m, residual {position_error:.2e} m)")]
    DrawInfeasible {
        waypoint: usize,
        draw_length: f64,
        position_error: f64,
    },
}

/// Draw lengths visited by [`track_draw`], evenly spaced from the brace
/// distance to `draw_length`. One waypoint means the final point only.
pub fn draw_waypoints(draw_length: f64, n_waypoints: usize) -> Vec<f64> {
    match n_waypoints {
        0 => Vec::new(),
        1 => vec![draw_length],
        n => (0..n)
            .map(|k| BRACE_DISTANCE + (draw_length - BRACE_DISTANCE) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Right-gripper target for a draw length: left position plus the draw vector,
/// left orientation with the gripper yaw offset.
pub fn right_gripper_pose(left_pose: &Pose, aim: &AimState, draw_length: f64) -> Pose {
    let delta = draw_delta(&aim.with_draw_length(draw_length));
    Pose::new(
        left_pose.position + delta,
        left_pose.yaw + RIGHT_GRIPPER_YAW_OFFSET,
        left_pose.pitch,
        left_pose.roll,
    )
}

/// Solves IK for each waypoint in turn, seeding with the previous solution.
pub fn track_draw(
    arm_right: &ArmModel,
    q_current: &JointVector,
    left_pose: &Pose,
    aim: &AimState,
    n_waypoints: usize,
    cfg: &IkConfig,
) -> Result<Vec<JointVector>, KinematicsError> {
    if n_waypoints == 0 {
        return Err(KinematicsError::InvalidInput(
            "n_waypoints must be >= 1".into(),
        ));
    }
    aim.validate()
        .map_err(|e| KinematicsError::InvalidInput(e.to_string()))?;
    if aim.draw_length < BRACE_DISTANCE - 1e-12 {
        return Err(KinematicsError::InvalidInput(format!(
            "draw length {} m is shorter than the brace distance",
            aim.draw_length
        )));
    }
    let mut seed = q_current.clone();
    let mut out = Vec::with_capacity(n_waypoints);
    for (k, d) in draw_waypoints(aim.draw_length, n_waypoints)
        .into_iter()
        .enumerate()
    {
        let target = right_gripper_pose(left_pose, aim, d);
        let sol = solve_ik(arm_right, &seed, &target, cfg)?;
        if !sol.report.converged {
            return Err(KinematicsError::DrawInfeasible {
                waypoint: k,
                draw_length: d,
                position_error: sol.report.position_error,
            });
        }
        seed = sol.q.clone();
        out.push(sol.q);
    }
    Ok(out)
}
