//! Kinematic model, underactuated coupling and key-frame choreography for a
//! 13-actuator, 20-joint anthropomorphic hand.
//!
//! Everything here is pure computation: no I/O beyond parsing strings that
//! callers hand in. The [`builtin`] module embeds the shipped hand spec,
//! gesture set, scripts and benchmark suite.

pub mod actuation;
pub mod benchmark;
pub mod builtin;
pub mod choreography;
mod error;
pub mod exec;
pub mod gestures;
pub mod hand;
mod joint;
pub mod numfmt;
pub mod regression;

pub use actuation::{
    coupling_residual, expand, project, ActuatorId, ActuatorVector, CouplingConfig, Projection,
    TendonModel,
};
pub use benchmark::{
    run_level1, run_suite, run_task, Bench, BenchmarkLevel, Budget, Report, TaskDef, TaskPayload,
    TaskResult,
};
pub use choreography::{
    compile_script, interpolate_segment, validate_trajectory, KeyFrame, KeyTarget,
    ManipulationScript, Trajectory, TrajectoryReport,
};
pub use error::{Error, Result};
pub use exec::ExecMode;
pub use gestures::{GestureCategory, GestureRecord, GestureSet, GestureSource, LoadMode};
pub use hand::{AngleInterval, Envelope, HandPose, HandSpec, JointSpec, Violation};
pub use joint::{Digit, JointId, JointRole, PerDigit};
