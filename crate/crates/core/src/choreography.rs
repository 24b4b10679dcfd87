//! Key-frame scripts and their compilation into frame-by-frame trajectories.
//!
//! Between consecutive key frames `a` and `b` with an interval of `T` frames,
//! frame `t` (1 ≤ t ≤ T) is `a + t·(b − a)/T`, with frame `T` set to `b`
//! exactly. Frame 0 of a trajectory is the first key frame.

use serde::{Deserialize, Serialize};

use crate::actuation::{coupling_residual, CouplingConfig};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::gestures::GestureSet;
use crate::hand::{validate_pose, Envelope, HandPose, HandSpec, Violation};
use crate::joint::JointId;
use crate::numfmt::sig6;

/// Default per-joint step limit for trajectory validation, degrees per frame.
pub const DEFAULT_MAX_STEP_DEG: f64 = 5.0;

/// Slack on the step limit so that exact multiples are not flagged through
/// rounding.
const STEP_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum KeyTarget {
    Gesture(String),
    Pose(HandPose),
}

#[derive(Clone, Debug, PartialEq)]
pub struct KeyFrame {
    pub target: KeyTarget,
    /// Frames taken to reach this key frame from the previous one. Ignored on
    /// the first key frame.
    pub interval_frames: Option<u32>,
    pub label: Option<String>,
}

impl KeyFrame {
    pub fn gesture(id: impl Into<String>, interval_frames: u32) -> Self {
        KeyFrame {
            target: KeyTarget::Gesture(id.into()),
            interval_frames: Some(interval_frames),
            label: None,
        }
    }

    pub fn pose(pose: HandPose, interval_frames: u32) -> Self {
        KeyFrame {
            target: KeyTarget::Pose(pose),
            interval_frames: Some(interval_frames),
            label: None,
        }
    }

    fn interval(&self) -> u32 {
        self.interval_frames.unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyFrameDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gesture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pose: Option<HandPose>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interval_frames: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptDoc {
    name: String,
    frame_rate_fps: f64,
    key_frames: Vec<KeyFrameDoc>,
}

/// An ordered list of key frames with per-segment intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScriptDoc", into = "ScriptDoc")]
pub struct ManipulationScript {
    pub name: String,
    pub frame_rate_fps: f64,
    pub key_frames: Vec<KeyFrame>,
}

impl ManipulationScript {
    pub fn new(
        name: impl Into<String>,
        frame_rate_fps: f64,
        key_frames: Vec<KeyFrame>,
    ) -> Result<Self> {
        let script = ManipulationScript {
            name: name.into(),
            frame_rate_fps,
            key_frames,
        };
        script.check()?;
        Ok(script)
    }

    fn check(&self) -> Result<()> {
        if !(self.frame_rate_fps.is_finite() && self.frame_rate_fps > 0.0) {
            return Err(Error::schema(
                "frame_rate_fps",
                "frame rate must be positive",
            ));
        }
        if self.key_frames.len() < 2 {
            return Err(Error::schema(
                "key_frames",
                "a script needs at least two key frames",
            ));
        }
        for (i, kf) in self.key_frames.iter().enumerate().skip(1) {
            match kf.interval_frames {
                Some(t) if t >= 1 => {}
                _ => {
                    return Err(Error::schema(
                        format!("key_frames[{i}].interval_frames"),
                        "interval must be at least 1 frame",
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("script serializes");
        text.push('\n');
        text
    }

    /// Total frame count once compiled: one plus the sum of intervals.
    pub fn frame_count(&self) -> usize {
        1 + self
            .key_frames
            .iter()
            .skip(1)
            .map(|k| k.interval() as usize)
            .sum::<usize>()
    }

    /// The same key frames played backwards, each segment keeping its interval.
    pub fn reversed(&self) -> Self {
        let n = self.key_frames.len();
        let key_frames = (0..n)
            .map(|j| {
                let old = &self.key_frames[n - 1 - j];
                let interval_frames = (j > 0).then(|| self.key_frames[n - j].interval());
                KeyFrame {
                    target: old.target.clone(),
                    interval_frames,
                    label: old.label.clone(),
                }
            })
            .collect();
        ManipulationScript {
            name: format!("{} (reversed)", self.name),
            frame_rate_fps: self.frame_rate_fps,
            key_frames,
        }
    }
}

impl TryFrom<ScriptDoc> for ManipulationScript {
    type Error = Error;

    fn try_from(doc: ScriptDoc) -> Result<Self> {
        let key_frames = doc
            .key_frames
            .into_iter()
            .enumerate()
            .map(|(i, kf)| {
                let target = match (kf.gesture, kf.pose) {
                    (Some(id), None) => KeyTarget::Gesture(id),
                    (None, Some(pose)) => KeyTarget::Pose(pose),
                    _ => {
                        return Err(Error::schema(
                            format!("key_frames[{i}]"),
                            "exactly one of `gesture` or `pose` is required",
                        ))
                    }
                };
                Ok(KeyFrame {
                    target,
                    interval_frames: kf.interval_frames,
                    label: kf.label,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ManipulationScript::new(doc.name, doc.frame_rate_fps, key_frames)
    }
}

impl From<ManipulationScript> for ScriptDoc {
    fn from(script: ManipulationScript) -> Self {
        ScriptDoc {
            name: script.name,
            frame_rate_fps: script.frame_rate_fps,
            key_frames: script
                .key_frames
                .into_iter()
                .enumerate()
                .map(|(i, kf)| {
                    let (gesture, pose) = match kf.target {
                        KeyTarget::Gesture(id) => (Some(id), None),
                        KeyTarget::Pose(p) => (None, Some(p)),
                    };
                    KeyFrameDoc {
                        gesture,
                        pose,
                        label: kf.label,
                        interval_frames: if i == 0 { None } else { kf.interval_frames },
                    }
                })
                .collect(),
        }
    }
}

/// A compiled frame sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    frames: Vec<HandPose>,
    key_frame_indices: Vec<usize>,
    frame_rate_fps: f64,
}

impl Trajectory {
    pub fn new(
        frames: Vec<HandPose>,
        key_frame_indices: Vec<usize>,
        frame_rate_fps: f64,
    ) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InvalidArgument("trajectory has no frames".into()));
        }
        let increasing = key_frame_indices.windows(2).all(|w| w[0] < w[1]);
        if !increasing
            || key_frame_indices.first() != Some(&0)
            || key_frame_indices.last() != Some(&(frames.len() - 1))
        {
            return Err(Error::InvalidArgument(
                "key frame indices must increase from 0 to the last frame".into(),
            ));
        }
        if !(frame_rate_fps.is_finite() && frame_rate_fps > 0.0) {
            return Err(Error::InvalidArgument("frame rate must be positive".into()));
        }
        Ok(Trajectory {
            frames,
            key_frame_indices,
            frame_rate_fps,
        })
    }

    pub fn frames(&self) -> &[HandPose] {
        &self.frames
    }

    pub fn key_frame_indices(&self) -> &[usize] {
        &self.key_frame_indices
    }

    pub fn frame_rate_fps(&self) -> f64 {
        self.frame_rate_fps
    }

    pub fn is_key_frame(&self, frame: usize) -> bool {
        self.key_frame_indices.binary_search(&frame).is_ok()
    }
}

/// The `T` frames after `from` on the way to `to`; the last equals `to`.
pub fn interpolate_segment(
    from: &HandPose,
    to: &HandPose,
    interval_frames: u32,
) -> Result<Vec<HandPose>> {
    if interval_frames == 0 {
        return Err(Error::InvalidArgument(
            "interval must be at least 1 frame".into(),
        ));
    }
    let total = f64::from(interval_frames);
    let (a, b) = (from.angles(), to.angles());
    Ok((1..=interval_frames)
        .map(|t| {
            if t == interval_frames {
                return *to;
            }
            let t = f64::from(t);
            HandPose::from_angles(std::array::from_fn(|j| a[j] + t * (b[j] - a[j]) / total))
        })
        .collect())
}

fn resolve(target: &KeyTarget, set: &GestureSet) -> Result<HandPose> {
    match target {
        KeyTarget::Gesture(id) => Ok(set.find(id)?.pose),
        KeyTarget::Pose(pose) => Ok(*pose),
    }
}

/// Resolves every key frame and concatenates the interpolated segments.
pub fn compile_script(script: &ManipulationScript, set: &GestureSet) -> Result<Trajectory> {
    script.check()?;
    let poses = script
        .key_frames
        .iter()
        .map(|kf| resolve(&kf.target, set))
        .collect::<Result<Vec<_>>>()?;

    let mut frames = Vec::with_capacity(script.frame_count());
    let mut key_frame_indices = Vec::with_capacity(poses.len());
    frames.push(poses[0]);
    key_frame_indices.push(0);
    for (kf, pair) in script.key_frames.iter().skip(1).zip(poses.windows(2)) {
        frames.extend(interpolate_segment(&pair[0], &pair[1], kf.interval())?);
        key_frame_indices.push(frames.len() - 1);
    }
    Trajectory::new(frames, key_frame_indices, script.frame_rate_fps)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameViolations {
    pub frame: usize,
    pub violations: Vec<Violation>,
}

/// A segment whose per-frame step exceeds the limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentAdvice {
    /// Index of the key frame the segment ends at.
    pub key_frame: usize,
    pub interval_frames: usize,
    pub largest_change_deg: f64,
    pub step_deg: f64,
    /// Smallest interval that keeps the step within the limit.
    pub suggested_interval: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryReport {
    pub rom_violations: Vec<FrameViolations>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub max_step_deg: f64,
    pub max_step_joint: Option<JointId>,
    pub max_step_frame: Option<usize>,
    pub step_limit_deg: f64,
    pub step_exceeded: bool,
    pub segments_over_limit: Vec<SegmentAdvice>,
}

impl TrajectoryReport {
    /// No envelope violation, residual within `residual_tolerance` and no
    /// step over the limit.
    pub fn is_clean(&self, residual_tolerance: f64) -> bool {
        self.rom_violations.is_empty()
            && self.max_residual <= residual_tolerance
            && !self.step_exceeded
    }
}

pub fn validate_trajectory(
    trajectory: &Trajectory,
    spec: &HandSpec,
    coupling: &CouplingConfig,
    max_step_deg: f64,
) -> TrajectoryReport {
    validate_trajectory_with(
        trajectory,
        spec,
        coupling,
        max_step_deg,
        ExecMode::default(),
    )
}

/// [`validate_trajectory`] with an explicit execution mode.
pub fn validate_trajectory_with(
    trajectory: &Trajectory,
    spec: &HandSpec,
    coupling: &CouplingConfig,
    max_step_deg: f64,
    mode: ExecMode,
) -> TrajectoryReport {
    let frames = trajectory.frames();
    let checks = exec::map(mode, frames, |pose| {
        (
            validate_pose(pose, spec, Envelope::Ours),
            coupling_residual(pose, coupling),
        )
    });
    let mut rom_violations = Vec::new();
    let mut residuals = Vec::with_capacity(frames.len());
    for (frame, (violations, residual)) in checks.into_iter().enumerate() {
        residuals.push(residual);
        if !violations.is_empty() {
            rom_violations.push(FrameViolations { frame, violations });
        }
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);

    let (mut max_step, mut max_step_joint, mut max_step_frame) = (0.0, None, None);
    for (i, pair) in frames.windows(2).enumerate() {
        for ((joint, a), (_, b)) in pair[0].iter().zip(pair[1].iter()) {
            let step = (b - a).abs();
            if step > max_step {
                max_step = step;
                max_step_joint = Some(joint);
                max_step_frame = Some(i + 1);
            }
        }
    }

    let mut segments_over_limit = Vec::new();
    let keys = trajectory.key_frame_indices();
    for (k, w) in keys.windows(2).enumerate() {
        let interval = w[1] - w[0];
        let largest = frames[w[0]].max_abs_diff(&frames[w[1]]);
        let step = largest / interval as f64;
        if step > max_step_deg + STEP_SLACK {
            segments_over_limit.push(SegmentAdvice {
                key_frame: k + 1,
                interval_frames: interval,
                largest_change_deg: largest,
                step_deg: step,
                suggested_interval: (largest / max_step_deg - STEP_SLACK).ceil() as usize,
            });
        }
    }

    TrajectoryReport {
        rom_violations,
        residuals,
        max_residual,
        max_step_deg: max_step,
        max_step_joint,
        max_step_frame,
        step_limit_deg: max_step_deg,
        step_exceeded: max_step > max_step_deg + STEP_SLACK,
        segments_over_limit,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectoryMetrics {
    pub duration_s: f64,
    pub gesture_count: usize,
    pub frame_count: usize,
}

pub fn trajectory_metrics(trajectory: &Trajectory) -> TrajectoryMetrics {
    let frame_count = trajectory.frames.len();
    TrajectoryMetrics {
        duration_s: (frame_count - 1) as f64 / trajectory.frame_rate_fps,
        gesture_count: trajectory.key_frame_indices.len(),
        frame_count,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointSeries {
    pub joint: JointId,
    /// `(frame, degrees)` pairs.
    pub points: Vec<(usize, f64)>,
}

pub fn joint_displacement_series(trajectory: &Trajectory, joints: &[JointId]) -> Vec<JointSeries> {
    joints
        .iter()
        .map(|&joint| JointSeries {
            joint,
            points: trajectory
                .frames
                .iter()
                .enumerate()
                .map(|(i, pose)| (i, pose.get(joint)))
                .collect(),
        })
        .collect()
}

/// CSV with `frame`, `is_key_frame` and the 20 joint angles in canonical
/// order, six significant digits.
pub fn export_trajectory_csv(trajectory: &Trajectory) -> String {
    let mut out = String::from("frame,is_key_frame");
    for joint in JointId::all() {
        out.push(',');
        out.push_str(&joint.column());
    }
    out.push('\n');
    for (i, pose) in trajectory.frames.iter().enumerate() {
        out.push_str(&i.to_string());
        out.push_str(if trajectory.is_key_frame(i) {
            ",1"
        } else {
            ",0"
        });
        for angle in pose.angles() {
            out.push(',');
            out.push_str(&sig6(*angle));
        }
        out.push('\n');
    }
    out
}
