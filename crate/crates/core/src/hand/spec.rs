use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AngleInterval, HandPose};
use crate::error::{Error, Result};
use crate::joint::{Digit, JointId, JointRole, PerDigit};

/// Which range-of-motion table to read from a [`JointSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Envelope {
    Human,
    Grasping,
    Ours,
}

impl FromStr for Envelope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "human" => Ok(Envelope::Human),
            "grasping" => Ok(Envelope::Grasping),
            "ours" => Ok(Envelope::Ours),
            _ => Err(Error::UnknownName {
                kind: "envelope",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Envelope::Human => "human",
            Envelope::Grasping => "grasping",
            Envelope::Ours => "ours",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointSpec {
    pub joint: JointId,
    pub rom_human: AngleInterval,
    pub rom_grasping: AngleInterval,
    /// `None` for joints the hand does not actuate (ring abduction).
    pub rom_ours: Option<AngleInterval>,
    /// Phalanx length driven by this joint; `None` on abduction rows.
    pub length_mm: Option<f64>,
}

impl JointSpec {
    pub fn envelope(&self, envelope: Envelope) -> Option<AngleInterval> {
        match envelope {
            Envelope::Human => Some(self.rom_human),
            Envelope::Grasping => Some(self.rom_grasping),
            Envelope::Ours => self.rom_ours,
        }
    }
}

/// Kinematic description of the hand: twenty joints with three range-of-motion
/// envelopes each, phalanx lengths and fingertip forces.
#[derive(Clone, Debug, PartialEq)]
pub struct HandSpec {
    joints: Vec<JointSpec>,
    fingertip_force_n: PerDigit<f64>,
}

#[derive(Serialize, Deserialize)]
struct JointRow {
    digit: String,
    role: String,
    rom_human: Vec<f64>,
    rom_grasping: Vec<f64>,
    rom_ours: Option<Vec<f64>>,
    length_mm: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HandSpecDoc {
    joints: Vec<JointRow>,
    fingertip_force_n: serde_json::Map<String, serde_json::Value>,
}

#[derive(Serialize)]
struct HandSpecDocOut<'a> {
    joints: Vec<JointRow>,
    fingertip_force_n: &'a PerDigit<f64>,
}

fn parse_interval(values: &[f64], path: &str) -> Result<AngleInterval> {
    match values {
        [lo, hi] => AngleInterval::checked(*lo, *hi, path),
        _ => Err(Error::schema(path, "interval must be a [lo, hi] pair")),
    }
}

impl HandSpec {
    /// Parses and validates a hand-spec JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: HandSpecDoc = serde_json::from_str(text)?;
        let mut slots: Vec<Option<JointSpec>> = vec![None; JointId::COUNT];
        for (i, row) in doc.joints.iter().enumerate() {
            let at = |field: &str| format!("joints[{i}].{field}");
            let digit: Digit = row
                .digit
                .parse()
                .map_err(|e: Error| Error::schema(at("digit"), e.to_string()))?;
            let role: JointRole = row
                .role
                .parse()
                .map_err(|e: Error| Error::schema(at("role"), e.to_string()))?;
            let joint = JointId::new(digit, role);
            let rom_human = parse_interval(&row.rom_human, &at("rom_human"))?;
            let rom_grasping = parse_interval(&row.rom_grasping, &at("rom_grasping"))?;
            let rom_ours = row
                .rom_ours
                .as_deref()
                .map(|v| parse_interval(v, &at("rom_ours")))
                .transpose()?;
            if let Some(len) = row.length_mm {
                if !(len.is_finite() && len > 0.0) {
                    return Err(Error::schema(at("length_mm"), "length must be positive"));
                }
            }
            let slot = &mut slots[joint.index()];
            if slot.is_some() {
                return Err(Error::schema(
                    format!("joints[{i}]"),
                    format!("duplicate joint {joint}"),
                ));
            }
            *slot = Some(JointSpec {
                joint,
                rom_human,
                rom_grasping,
                rom_ours,
                length_mm: row.length_mm,
            });
        }
        let mut joints = Vec::with_capacity(JointId::COUNT);
        for (joint, slot) in JointId::all().zip(slots) {
            joints.push(
                slot.ok_or_else(|| Error::schema("joints", format!("missing joint {joint}")))?,
            );
        }

        let mut forces = [0.0; 5];
        let mut seen = [false; 5];
        for (key, value) in &doc.fingertip_force_n {
            let path = format!("fingertip_force_n.{key}");
            let digit: Digit = key
                .parse()
                .map_err(|e: Error| Error::schema(&path, e.to_string()))?;
            forces[digit.index()] = value
                .as_f64()
                .ok_or_else(|| Error::schema(&path, "force must be a number"))?;
            seen[digit.index()] = true;
        }
        if let Some(d) = Digit::ALL.into_iter().find(|d| !seen[d.index()]) {
            return Err(Error::schema(
                "fingertip_force_n",
                format!("missing force for {d}"),
            ));
        }

        Ok(HandSpec {
            joints,
            fingertip_force_n: PerDigit(forces),
        })
    }

    /// Canonical pretty-printed JSON. Shipped documents are stored in this form.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_doc()).expect("spec serializes");
        text.push('\n');
        text
    }

    fn to_doc(&self) -> HandSpecDocOut<'_> {
        HandSpecDocOut {
            joints: self
                .joints
                .iter()
                .map(|j| JointRow {
                    digit: j.joint.digit.name().to_string(),
                    role: j.joint.role.name().to_string(),
                    rom_human: vec![j.rom_human.lo(), j.rom_human.hi()],
                    rom_grasping: vec![j.rom_grasping.lo(), j.rom_grasping.hi()],
                    rom_ours: j.rom_ours.map(|r| vec![r.lo(), r.hi()]),
                    length_mm: j.length_mm,
                })
                .collect(),
            fingertip_force_n: &self.fingertip_force_n,
        }
    }

    pub fn joint(&self, joint: JointId) -> &JointSpec {
        &self.joints[joint.index()]
    }

    pub fn joints(&self) -> &[JointSpec] {
        &self.joints
    }

    pub fn fingertip_force(&self, digit: Digit) -> f64 {
        *self.fingertip_force_n.get(digit)
    }

    pub fn envelope(&self, joint: JointId, envelope: Envelope) -> Option<AngleInterval> {
        self.joint(joint).envelope(envelope)
    }
}

impl Serialize for HandSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_doc().serialize(serializer)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    OutOfRange,
    /// Non-zero angle on a joint the hand cannot move.
    UnactuatedJoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub joint: JointId,
    pub angle: f64,
    /// Signed distance outside the envelope in degrees.
    pub excess: f64,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::OutOfRange => write!(
                f,
                "{} = {}° out of range (excess {:+}°)",
                self.joint, self.angle, self.excess
            ),
            ViolationKind::UnactuatedJoint => {
                write!(f, "{} = {}° on unactuated joint", self.joint, self.angle)
            }
        }
    }
}

/// Joints of `pose` lying outside `envelope`, in canonical joint order.
///
/// A joint without an envelope passes only at exactly 0°.
pub fn validate_pose(pose: &HandPose, spec: &HandSpec, envelope: Envelope) -> Vec<Violation> {
    pose.iter()
        .filter_map(|(joint, angle)| match spec.envelope(joint, envelope) {
            Some(range) => {
                let excess = range.excess(angle);
                (excess != 0.0 || angle.is_nan()).then_some(Violation {
                    joint,
                    angle,
                    excess,
                    kind: ViolationKind::OutOfRange,
                })
            }
            None => (angle != 0.0).then_some(Violation {
                joint,
                angle,
                excess: angle,
                kind: ViolationKind::UnactuatedJoint,
            }),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    fn index(role: JointRole) -> JointId {
        JointId::new(Digit::Index, role)
    }

    #[test]
    fn default_spec_matches_table() {
        let spec = builtin::hand_spec();
        let dip = spec.joint(index(JointRole::Distal));
        assert_eq!(dip.rom_ours, Some(AngleInterval::new(0.0, 70.0).unwrap()));
        assert_eq!(dip.length_mm, Some(25.0));
        let mcp = spec.joint(index(JointRole::Base));
        assert_eq!(mcp.rom_ours.unwrap().lo(), -15.0);
        assert_eq!(mcp.rom_ours.unwrap().hi(), 82.0);
        assert_eq!(mcp.length_mm, Some(43.0));
        let ring_abd = spec.joint(JointId::new(Digit::Ring, JointRole::AbdAdd));
        assert_eq!(ring_abd.rom_ours, None);
        assert_eq!(ring_abd.length_mm, None);
        let forces: Vec<f64> = Digit::ALL
            .iter()
            .map(|&d| spec.fingertip_force(d))
            .collect();
        assert_eq!(forces, vec![10.8, 23.5, 21.6, 22.6, 20.6]);
    }

    #[test]
    fn default_document_is_canonical() {
        let spec = builtin::hand_spec();
        assert_eq!(spec.to_json(), builtin::HAND_SPEC_JSON);
        assert_eq!(HandSpec::from_json(&spec.to_json()).unwrap(), spec);
    }

    fn edit_doc(edit: impl FnOnce(&mut serde_json::Value)) -> Result<HandSpec> {
        let mut doc: serde_json::Value = serde_json::from_str(builtin::HAND_SPEC_JSON).unwrap();
        edit(&mut doc);
        HandSpec::from_json(&doc.to_string())
    }

    #[test]
    fn missing_row_names_the_joint() {
        let err = edit_doc(|doc| {
            doc["joints"].as_array_mut().unwrap().pop();
        })
        .unwrap_err();
        assert!(
            err.to_string().contains("missing joint Little.J4_AbdAdd"),
            "{err}"
        );
    }

    #[test]
    fn reversed_interval_is_rejected() {
        let err = edit_doc(|doc| {
            // Thumb CMC flexion row.
            doc["joints"][2]["rom_ours"] = serde_json::json!([61.0, 0.0]);
        })
        .unwrap_err();
        match err {
            Error::Interval { path, lo, hi } => {
                assert_eq!(path, "joints[2].rom_ours");
                assert_eq!((lo, hi), (61.0, 0.0));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_digit_and_role() {
        let err = edit_doc(|doc| doc["joints"][0]["digit"] = "Pinky".into()).unwrap_err();
        assert!(err.to_string().contains("joints[0].digit"), "{err}");
        let err = edit_doc(|doc| doc["joints"][5]["role"] = "J5".into()).unwrap_err();
        assert!(err.to_string().contains("joints[5].role"), "{err}");
        let err = edit_doc(|doc| {
            doc["fingertip_force_n"]
                .as_object_mut()
                .unwrap()
                .remove("Ring");
        })
        .unwrap_err();
        assert!(err.to_string().contains("missing force for Ring"), "{err}");
    }

    #[test]
    fn validate_zero_pose_is_clean() {
        let spec = builtin::hand_spec();
        for env in [Envelope::Human, Envelope::Grasping, Envelope::Ours] {
            assert!(validate_pose(&HandPose::zero(), &spec, env).is_empty());
        }
    }

    #[test]
    fn validate_reports_signed_excess() {
        let spec = builtin::hand_spec();
        let pose = HandPose::zero().with(index(JointRole::Base), 85.0);
        let v = validate_pose(&pose, &spec, Envelope::Ours);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].joint, index(JointRole::Base));
        assert_eq!(v[0].excess, 3.0);
        assert_eq!(v[0].kind, ViolationKind::OutOfRange);

        let pose = HandPose::zero().with(index(JointRole::Base), -20.0);
        assert_eq!(validate_pose(&pose, &spec, Envelope::Ours)[0].excess, -5.0);
    }

    #[test]
    fn unactuated_joint_only_passes_at_zero() {
        let spec = builtin::hand_spec();
        let ring_abd = JointId::new(Digit::Ring, JointRole::AbdAdd);
        let v = validate_pose(&HandPose::zero().with(ring_abd, 5.0), &spec, Envelope::Ours);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::UnactuatedJoint);
        // Same angle is fine against the human envelope [-20, 25].
        assert!(validate_pose(
            &HandPose::zero().with(ring_abd, 5.0),
            &spec,
            Envelope::Human
        )
        .is_empty());
    }
}
