#![no_main]

use libfuzzer_sys::fuzz_target;
use recurve::kinematics::{ArmModel, JointVector};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(arm) = ArmModel::from_toml_str(text) {
        // A loaded arm is valid: forward kinematics at zero must work.
        let q = JointVector::zeros(arm.n_joints());
        arm.forward_kinematics(&q).unwrap();
        let again = ArmModel::from_toml_str(&arm.to_toml_string()).unwrap();
        assert_eq!(again, arm);
    }
});
