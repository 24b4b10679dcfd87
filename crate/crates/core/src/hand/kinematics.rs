//! Per-digit forward kinematics and fingertip sweep analysis.
//!
//! Each digit lives in its own base frame: the base joint sits at the
//! origin, the straight digit points along +x and the palm normal is +z.
//! The abduction angle (J4) turns the whole digit about +z first; J3, J2
//! and J1 then flex about the rotated +y axis, so positive flexion curls
//! the fingertip towards -z. Links run along the local x axis with the
//! proximal, middle and distal phalanx lengths.

use nalgebra::{Rotation3, Vector3};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{HandPose, HandSpec};
use crate::actuation::{expand, ActuatorId, ActuatorVector, CouplingConfig};
use crate::error::{Error, Result};
use crate::joint::{Digit, JointId, JointRole};
use crate::regression::least_squares;

/// Joint positions of one digit in millimetres.
///
/// The base joint carries both the abduction and the J3 flexion axis, so
/// `base` and `j3` coincide.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DigitChain {
    pub digit: Digit,
    pub base: Vector3<f64>,
    pub j3: Vector3<f64>,
    pub j2: Vector3<f64>,
    pub j1: Vector3<f64>,
    pub tip: Vector3<f64>,
}

impl DigitChain {
    pub fn points(&self) -> [Vector3<f64>; 5] {
        [self.base, self.j3, self.j2, self.j1, self.tip]
    }
}

impl Serialize for DigitChain {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let points: Vec<[f64; 3]> = self.points().iter().map(|p| [p.x, p.y, p.z]).collect();
        let mut s = serializer.serialize_struct("DigitChain", 2)?;
        s.serialize_field("digit", &self.digit)?;
        s.serialize_field("points", &points)?;
        s.end()
    }
}

fn phalanx_length(spec: &HandSpec, digit: Digit, role: JointRole) -> Result<f64> {
    let joint = JointId::new(digit, role);
    spec.joint(joint)
        .length_mm
        .ok_or_else(|| Error::Config(format!("no phalanx length for {joint}")))
}

pub fn forward_kinematics(pose: &HandPose, spec: &HandSpec, digit: Digit) -> Result<DigitChain> {
    let distal = phalanx_length(spec, digit, JointRole::Distal)?;
    let middle = phalanx_length(spec, digit, JointRole::Middle)?;
    let proximal = phalanx_length(spec, digit, JointRole::Base)?;

    let flex =
        |role| Rotation3::from_axis_angle(&Vector3::y_axis(), pose.angle(digit, role).to_radians());
    let abduction = Rotation3::from_axis_angle(
        &Vector3::z_axis(),
        pose.angle(digit, JointRole::AbdAdd).to_radians(),
    );

    let base = Vector3::zeros();
    let r3 = abduction * flex(JointRole::Base);
    let j2 = base + r3 * Vector3::new(proximal, 0.0, 0.0);
    let r2 = r3 * flex(JointRole::Middle);
    let j1 = j2 + r2 * Vector3::new(middle, 0.0, 0.0);
    let r1 = r2 * flex(JointRole::Distal);
    let tip = j1 + r1 * Vector3::new(distal, 0.0, 0.0);

    Ok(DigitChain {
        digit,
        base,
        j3: base,
        j2,
        j1,
        tip,
    })
}

/// Forward kinematics for all five digits.
pub fn hand_kinematics(pose: &HandPose, spec: &HandSpec) -> Result<Vec<DigitChain>> {
    Digit::ALL
        .into_iter()
        .map(|d| forward_kinematics(pose, spec, d))
        .collect()
}

fn ours_max(spec: &HandSpec, digit: Digit, role: JointRole) -> Result<f64> {
    let joint = JointId::new(digit, role);
    spec.joint(joint)
        .rom_ours
        .map(|r| r.hi())
        .ok_or_else(|| Error::Config(format!("{joint} has no actuated range")))
}

/// Actuator input that curls `digit` to fraction `s` of its full flexion.
pub fn flexion_sweep_input(spec: &HandSpec, digit: Digit, s: f64) -> Result<ActuatorVector> {
    let mut actuators = ActuatorVector::zero();
    match ActuatorId::for_digit(digit) {
        None => actuators.set(ActuatorId::RingAll, s),
        Some([flex, base, _abd]) => {
            actuators.set(flex, s * ours_max(spec, digit, JointRole::Distal)?);
            actuators.set(base, s * ours_max(spec, digit, JointRole::Base)?);
        }
    }
    Ok(actuators)
}

/// Fingertip positions while the digit's flexion actuators sweep uniformly
/// from zero to the top of the actuated range, abduction held at zero.
pub fn fingertip_trajectory(
    spec: &HandSpec,
    digit: Digit,
    coupling: &CouplingConfig,
    samples: usize,
) -> Result<Vec<Vector3<f64>>> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    (0..samples)
        .map(|i| {
            let s = i as f64 / (samples - 1) as f64;
            let pose = expand(&flexion_sweep_input(spec, digit, s)?, coupling);
            Ok(forward_kinematics(&pose, spec, digit)?.tip)
        })
        .collect()
}

/// Maps points of an unabducted digit into its flexion plane, with the
/// second coordinate pointing to the palmar side.
pub fn flexion_plane(points: &[Vector3<f64>]) -> Vec<[f64; 2]> {
    points.iter().map(|p| [p.x, -p.z]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpiralFit {
    /// Radius at polar angle zero, same unit as the input.
    pub a: f64,
    /// Growth rate per radian.
    pub b: f64,
    pub r_squared: f64,
}

/// Fits `r = a·exp(b·θ)` about the origin by least squares on `ln r`.
///
/// Points are taken in polyline order and their polar angles unwrapped, so
/// a curve may sweep more than half a turn.
pub fn log_spiral_fit(points: &[[f64; 2]]) -> Result<SpiralFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let mut angles = Vec::with_capacity(points.len());
    let mut log_radii = Vec::with_capacity(points.len());
    let mut previous: Option<f64> = None;
    for (i, [x, y]) in points.iter().enumerate() {
        let r = x.hypot(*y);
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Fit(format!("point {i} lies on the fitting origin")));
        }
        let mut theta = y.atan2(*x);
        if let Some(prev) = previous {
            let turns = ((prev - theta) / std::f64::consts::TAU).round();
            theta += turns * std::f64::consts::TAU;
        }
        previous = Some(theta);
        angles.push(theta);
        log_radii.push(r.ln());
    }
    let line = least_squares(&angles, &log_radii)
        .map_err(|_| Error::Fit("all points share one polar angle".into()))?;
    Ok(SpiralFit {
        a: line.intercept.exp(),
        b: line.slope,
        r_squared: line.r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    const EPS: f64 = 1e-9;

    fn index(role: JointRole) -> JointId {
        JointId::new(Digit::Index, role)
    }

    #[test]
    fn straight_index_is_93mm() {
        let spec = builtin::hand_spec();
        let chain = forward_kinematics(&HandPose::zero(), &spec, Digit::Index).unwrap();
        assert!((chain.tip - Vector3::new(93.0, 0.0, 0.0)).norm() < EPS);
        assert!((chain.j2 - Vector3::new(43.0, 0.0, 0.0)).norm() < EPS);
        assert!((chain.j1 - Vector3::new(68.0, 0.0, 0.0)).norm() < EPS);
        for p in chain.points() {
            assert!(p.y.abs() < EPS && p.z.abs() < EPS);
        }
    }

    #[test]
    fn base_flexion_of_90_points_down() {
        let spec = builtin::hand_spec();
        let pose = HandPose::zero().with(index(JointRole::Base), 90.0);
        let chain = forward_kinematics(&pose, &spec, Digit::Index).unwrap();
        // Rotation about y by 90° takes +x to -z.
        assert!((chain.j2 - Vector3::new(0.0, 0.0, -43.0)).norm() < EPS);
        assert!((chain.tip - Vector3::new(0.0, 0.0, -93.0)).norm() < EPS);
    }

    #[test]
    fn distal_flexion_of_90_bends_last_link() {
        let spec = builtin::hand_spec();
        let pose = HandPose::zero().with(index(JointRole::Distal), 90.0);
        let chain = forward_kinematics(&pose, &spec, Digit::Index).unwrap();
        assert!((chain.tip - Vector3::new(68.0, 0.0, -25.0)).norm() < EPS);
    }

    #[test]
    fn abduction_rotates_in_palm_plane() {
        let spec = builtin::hand_spec();
        let pose = HandPose::zero().with(index(JointRole::AbdAdd), 10.0);
        let chain = forward_kinematics(&pose, &spec, Digit::Index).unwrap();
        assert!((chain.tip.norm() - 93.0).abs() < EPS);
        let t = 10f64.to_radians();
        assert!((chain.tip - Vector3::new(93.0 * t.cos(), 93.0 * t.sin(), 0.0)).norm() < EPS);
    }

    #[test]
    fn sweep_endpoints() {
        let spec = builtin::hand_spec();
        let coupling = CouplingConfig::from_spec(&spec).unwrap();
        let pts = fingertip_trajectory(&spec, Digit::Index, &coupling, 2).unwrap();
        assert_eq!(pts.len(), 2);
        assert!((pts[0] - Vector3::new(93.0, 0.0, 0.0)).norm() < EPS);
        let flexed = HandPose::zero()
            .with(index(JointRole::Distal), 70.0)
            .with(index(JointRole::Middle), 100.0)
            .with(index(JointRole::Base), 82.0);
        let expected = forward_kinematics(&flexed, &spec, Digit::Index)
            .unwrap()
            .tip;
        assert!((pts[1] - expected).norm() < EPS);
        assert!(fingertip_trajectory(&spec, Digit::Index, &coupling, 1).is_err());
    }

    #[test]
    fn spiral_fit_recovers_exact_spiral() {
        let pts: Vec<[f64; 2]> = (1..=10)
            .map(|k| {
                let t = k as f64 * 0.1;
                let r = 2.0 * (0.3 * t).exp();
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let fit = log_spiral_fit(&pts).unwrap();
        assert!((fit.a - 2.0).abs() < EPS);
        assert!((fit.b - 0.3).abs() < EPS);
        assert!((fit.r_squared - 1.0).abs() < EPS);
    }

    #[test]
    fn spiral_fit_on_circle() {
        let pts: Vec<[f64; 2]> = (0..12)
            .map(|k| {
                let t = k as f64 * 0.25;
                [5.0 * t.cos(), 5.0 * t.sin()]
            })
            .collect();
        let fit = log_spiral_fit(&pts).unwrap();
        assert!(fit.b.abs() < EPS);
        assert!((fit.a - 5.0).abs() < EPS);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn spiral_fit_unwraps_past_pi() {
        let pts: Vec<[f64; 2]> = (0..40)
            .map(|k| {
                let t = k as f64 * 0.2;
                let r = (0.1 * t).exp();
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let fit = log_spiral_fit(&pts).unwrap();
        assert!((fit.b - 0.1).abs() < EPS);
    }

    #[test]
    fn spiral_fit_degenerate() {
        assert!(log_spiral_fit(&[[1.0, 0.0], [2.0, 0.0]]).is_err());
        assert!(log_spiral_fit(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).is_err());
        assert!(log_spiral_fit(&[[0.0, 0.0], [2.0, 2.0], [3.0, 1.0]]).is_err());
    }
}
