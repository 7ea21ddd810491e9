//! Perception, kinematics and ballistics for a humanoid shooting a recurve bow.

pub mod ballistics;
pub mod controller;
pub mod geometry;
pub mod harness;
pub mod kinematics;
pub mod vision;
