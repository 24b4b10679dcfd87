//! Hand model: joint envelopes, poses, forward kinematics and range-of-motion
//! coverage.

mod coverage;
mod interval;
mod kinematics;
mod pose;
mod spec;

pub use coverage::{rom_coverage, AbsentPolicy, Aggregation, Coverage, JointCoverage};
pub use interval::AngleInterval;
pub use kinematics::{
    fingertip_trajectory, flexion_plane, flexion_sweep_input, forward_kinematics, hand_kinematics,
    log_spiral_fit, DigitChain, SpiralFit,
};
pub use pose::HandPose;
pub use spec::{validate_pose, Envelope, HandSpec, JointSpec, Violation, ViolationKind};
