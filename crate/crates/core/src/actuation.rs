//! The 13-actuator coupling between actuator space and the 20-joint pose, and
//! the tendon excursion model.
//!
//! Thumb, index, middle and little each have three actuators: `Flex` drives
//! the distal joint with the middle joint following at a fixed ratio
//! `kappa`, `Base` drives J3 and `AbdAdd` drives J4. The ring finger has a
//! single actuator whose normalized value `u` scales a fixed profile over its
//! three flexion joints; its abduction stays at zero.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::choreography::Trajectory;
use crate::error::{Error, Result};
use crate::hand::{HandPose, HandSpec};
use crate::joint::{Digit, JointId, JointRole, PerDigit};
use crate::numfmt::sig6;
use crate::regression::{least_squares, LinearFit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActuatorId {
    ThumbFlex,
    ThumbBase,
    ThumbAbdAdd,
    IndexFlex,
    IndexBase,
    IndexAbdAdd,
    MiddleFlex,
    MiddleBase,
    MiddleAbdAdd,
    LittleFlex,
    LittleBase,
    LittleAbdAdd,
    RingAll,
}

impl ActuatorId {
    pub const COUNT: usize = 13;

    pub const ALL: [ActuatorId; 13] = [
        ActuatorId::ThumbFlex,
        ActuatorId::ThumbBase,
        ActuatorId::ThumbAbdAdd,
        ActuatorId::IndexFlex,
        ActuatorId::IndexBase,
        ActuatorId::IndexAbdAdd,
        ActuatorId::MiddleFlex,
        ActuatorId::MiddleBase,
        ActuatorId::MiddleAbdAdd,
        ActuatorId::LittleFlex,
        ActuatorId::LittleBase,
        ActuatorId::LittleAbdAdd,
        ActuatorId::RingAll,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn key(self) -> &'static str {
        match self {
            ActuatorId::ThumbFlex => "thumb_flex",
            ActuatorId::ThumbBase => "thumb_base",
            ActuatorId::ThumbAbdAdd => "thumb_abdadd",
            ActuatorId::IndexFlex => "index_flex",
            ActuatorId::IndexBase => "index_base",
            ActuatorId::IndexAbdAdd => "index_abdadd",
            ActuatorId::MiddleFlex => "middle_flex",
            ActuatorId::MiddleBase => "middle_base",
            ActuatorId::MiddleAbdAdd => "middle_abdadd",
            ActuatorId::LittleFlex => "little_flex",
            ActuatorId::LittleBase => "little_base",
            ActuatorId::LittleAbdAdd => "little_abdadd",
            ActuatorId::RingAll => "ring_all",
        }
    }

    /// `[Flex, Base, AbdAdd]` for the digits with three actuators, `None` for
    /// the ring finger.
    pub fn for_digit(digit: Digit) -> Option<[ActuatorId; 3]> {
        use ActuatorId::*;
        match digit {
            Digit::Thumb => Some([ThumbFlex, ThumbBase, ThumbAbdAdd]),
            Digit::Index => Some([IndexFlex, IndexBase, IndexAbdAdd]),
            Digit::Middle => Some([MiddleFlex, MiddleBase, MiddleAbdAdd]),
            Digit::Little => Some([LittleFlex, LittleBase, LittleAbdAdd]),
            Digit::Ring => None,
        }
    }
}

impl fmt::Display for ActuatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ActuatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ActuatorId::ALL
            .into_iter()
            .find(|a| a.key() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "actuator",
                name: s.to_string(),
            })
    }
}

/// Actuator command values. Flex, Base and AbdAdd entries are the driven
/// joint angle in degrees; `RingAll` is the normalized ring closure `u`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ActuatorVector {
    values: [f64; ActuatorId::COUNT],
}

impl ActuatorVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_values(values: [f64; ActuatorId::COUNT]) -> Self {
        ActuatorVector { values }
    }

    pub fn values(&self) -> &[f64; ActuatorId::COUNT] {
        &self.values
    }

    pub fn get(&self, id: ActuatorId) -> f64 {
        self.values[id.index()]
    }

    pub fn set(&mut self, id: ActuatorId, value: f64) {
        self.values[id.index()] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (ActuatorId, f64)> + '_ {
        ActuatorId::ALL.into_iter().zip(self.values.iter().copied())
    }

    pub fn max_abs_diff(&self, other: &ActuatorVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Serialize for ActuatorVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(ActuatorId::COUNT))?;
        for (id, v) in self.iter() {
            map.serialize_entry(id.key(), &v)?;
        }
        map.end()
    }
}

/// Coupling law parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingConfig {
    /// Passive middle-joint angle per degree of distal-joint angle; `None`
    /// for the ring finger.
    kappa: PerDigit<Option<f64>>,
    /// Ring (J1, J2, J3) angles at full closure `u = 1`.
    ring_profile: [f64; 3],
}

impl CouplingConfig {
    pub fn new(
        thumb: f64,
        index: f64,
        middle: f64,
        little: f64,
        ring_profile: [f64; 3],
    ) -> Result<Self> {
        for (digit, k) in [
            (Digit::Thumb, thumb),
            (Digit::Index, index),
            (Digit::Middle, middle),
            (Digit::Little, little),
        ] {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::Config(format!(
                    "kappa for {digit} must be positive, got {k}"
                )));
            }
        }
        if ring_profile.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("ring profile must be finite".into()));
        }
        Ok(CouplingConfig {
            kappa: PerDigit([Some(thumb), Some(index), Some(middle), None, Some(little)]),
            ring_profile,
        })
    }

    /// Defaults from the actuated envelope: `kappa` is the ratio of the
    /// middle-joint to distal-joint maxima, so both joints reach their limit
    /// together, and the ring profile is the ring flexion maxima.
    pub fn from_spec(spec: &HandSpec) -> Result<Self> {
        let max = |digit, role| {
            let joint = JointId::new(digit, role);
            spec.joint(joint)
                .rom_ours
                .map(|r| r.hi())
                .ok_or_else(|| Error::Config(format!("{joint} has no actuated range")))
        };
        let ratio = |digit| -> Result<f64> {
            Ok(max(digit, JointRole::Middle)? / max(digit, JointRole::Distal)?)
        };
        let config = CouplingConfig::new(
            ratio(Digit::Thumb)?,
            ratio(Digit::Index)?,
            ratio(Digit::Middle)?,
            ratio(Digit::Little)?,
            [
                max(Digit::Ring, JointRole::Distal)?,
                max(Digit::Ring, JointRole::Middle)?,
                max(Digit::Ring, JointRole::Base)?,
            ],
        )?;
        config.check_against(spec)?;
        Ok(config)
    }

    /// Checks that the ring profile lies inside the ring's actuated range.
    pub fn check_against(&self, spec: &HandSpec) -> Result<()> {
        for (role, p) in JointRole::FLEXION.into_iter().zip(self.ring_profile) {
            let joint = JointId::new(Digit::Ring, role);
            match spec.joint(joint).rom_ours {
                Some(r) if r.contains(p) && r.contains(0.0) => {}
                _ => {
                    return Err(Error::Config(format!(
                        "ring profile {p}° for {joint} is outside its actuated range"
                    )))
                }
            }
        }
        Ok(())
    }

    /// Coupling ratio for a three-actuator digit; `None` for the ring finger.
    pub fn kappa(&self, digit: Digit) -> Option<f64> {
        *self.kappa.get(digit)
    }

    pub fn ring_profile(&self) -> [f64; 3] {
        self.ring_profile
    }
}

/// Maps actuator values to the 20 joint angles. No clamping is applied.
pub fn expand(actuators: &ActuatorVector, coupling: &CouplingConfig) -> HandPose {
    let mut pose = HandPose::zero();
    for digit in Digit::ALL {
        let at = |role| JointId::new(digit, role);
        match (ActuatorId::for_digit(digit), coupling.kappa(digit)) {
            (Some([flex, base, abd]), Some(kappa)) => {
                let f = actuators.get(flex);
                pose.set(at(JointRole::Distal), f);
                pose.set(at(JointRole::Middle), kappa * f);
                pose.set(at(JointRole::Base), actuators.get(base));
                pose.set(at(JointRole::AbdAdd), actuators.get(abd));
            }
            _ => {
                let u = actuators.get(ActuatorId::RingAll);
                for (role, p) in JointRole::FLEXION.into_iter().zip(coupling.ring_profile) {
                    pose.set(at(role), u * p);
                }
            }
        }
    }
    pose
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Projection {
    pub actuators: ActuatorVector,
    /// Largest per-joint gap between the pose and its re-expansion, degrees.
    pub residual: f64,
}

/// Least-squares inverse of [`expand`], solved per digit in closed form.
///
/// The ring closure is clamped to `[0, 1]`. A pose is reachable by the
/// coupling exactly when the residual is zero.
pub fn project(pose: &HandPose, coupling: &CouplingConfig) -> Projection {
    let mut actuators = ActuatorVector::zero();
    for digit in Digit::ALL {
        let angle = |role| pose.angle(digit, role);
        match (ActuatorId::for_digit(digit), coupling.kappa(digit)) {
            (Some([flex, base, abd]), Some(kappa)) => {
                // argmin_f (f - J1)^2 + (kappa f - J2)^2
                let f = (angle(JointRole::Distal) + kappa * angle(JointRole::Middle))
                    / (1.0 + kappa * kappa);
                actuators.set(flex, f);
                actuators.set(base, angle(JointRole::Base));
                actuators.set(abd, angle(JointRole::AbdAdd));
            }
            _ => {
                let profile = coupling.ring_profile;
                let norm: f64 = profile.iter().map(|p| p * p).sum();
                let u = if norm > 0.0 {
                    JointRole::FLEXION
                        .iter()
                        .zip(profile)
                        .map(|(&role, p)| p * angle(role))
                        .sum::<f64>()
                        / norm
                } else {
                    0.0
                };
                actuators.set(ActuatorId::RingAll, u.clamp(0.0, 1.0));
            }
        }
    }
    let residual = expand(&actuators, coupling).max_abs_diff(pose);
    Projection {
        actuators,
        residual,
    }
}

/// Coupling residual of a pose: distance to the nearest reachable pose,
/// per-joint maximum in degrees.
pub fn coupling_residual(pose: &HandPose, coupling: &CouplingConfig) -> f64 {
    project(pose, coupling).residual
}

/// Linear tendon model: excursion `E = r·φ` per joint with moment arm `r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TendonModel {
    moment_arm_mm: BTreeMap<JointId, f64>,
    /// Intercept `b` of the fitted line `φ = a·E + b`, degrees.
    offset_deg: f64,
}

impl TendonModel {
    pub fn new(
        moment_arms: impl IntoIterator<Item = (JointId, f64)>,
        offset_deg: f64,
    ) -> Result<Self> {
        let mut moment_arm_mm = BTreeMap::new();
        for (joint, r) in moment_arms {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Config(format!(
                    "moment arm for {joint} must be positive"
                )));
            }
            moment_arm_mm.insert(joint, r);
        }
        Ok(TendonModel {
            moment_arm_mm,
            offset_deg,
        })
    }

    pub fn moment_arm(&self, joint: JointId) -> Option<f64> {
        self.moment_arm_mm.get(&joint).copied()
    }

    pub fn offset_deg(&self) -> f64 {
        self.offset_deg
    }

    /// Joint angle in degrees for a single-joint excursion, inverting
    /// `E = r·φ` and adding the fitted offset.
    pub fn joint_angle(&self, joint: JointId, excursion_mm: f64) -> Result<f64> {
        let r = self.moment_arm(joint).ok_or_else(|| unmodeled(joint))?;
        Ok((excursion_mm / r).to_degrees() + self.offset_deg)
    }
}

fn unmodeled(joint: JointId) -> Error {
    Error::Config(format!("no moment arm for {joint}"))
}

/// Tendon excursion in millimetres for the listed joint angles (degrees):
/// the sum of `r_j·φ_j` with `φ` in radians.
pub fn excursion(angles: &[(JointId, f64)], model: &TendonModel) -> Result<f64> {
    angles.iter().try_fold(0.0, |acc, &(joint, degrees)| {
        let r = model.moment_arm(joint).ok_or_else(|| unmodeled(joint))?;
        Ok(acc + r * degrees.to_radians())
    })
}

/// Fits `φ = a·E + b` (angles in degrees, excursions in millimetres).
pub fn fit_linear(excursions_mm: &[f64], angles_deg: &[f64]) -> Result<LinearFit> {
    least_squares(excursions_mm, angles_deg)
}

/// One CSV row per trajectory frame: frame index, the 13 projected actuator
/// values in canonical order and the coupling residual.
pub fn export_actuator_csv(trajectory: &Trajectory, coupling: &CouplingConfig) -> String {
    let mut out = String::from("frame");
    for id in ActuatorId::ALL {
        out.push(',');
        out.push_str(id.key());
    }
    out.push_str(",residual_deg\n");
    for (i, pose) in trajectory.frames().iter().enumerate() {
        let projection = project(pose, coupling);
        out.push_str(&i.to_string());
        for (_, v) in projection.actuators.iter() {
            out.push(',');
            out.push_str(&sig6(v));
        }
        out.push(',');
        out.push_str(&sig6(projection.residual));
        out.push('\n');
    }
    out
}
