use std::collections::BTreeMap;
use std::ops::{Index, IndexMut};

use serde::ser::SerializeMap;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::joint::{Digit, JointId, JointRole};

/// Twenty joint angles in degrees, four per digit.
///
/// No range constraint is part of the type: an infeasible pose can be held
/// and diagnosed with [`crate::validate_pose`].
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct HandPose {
    angles: [f64; JointId::COUNT],
}

impl HandPose {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_angles(angles: [f64; JointId::COUNT]) -> Self {
        HandPose { angles }
    }

    pub fn angles(&self) -> &[f64; JointId::COUNT] {
        &self.angles
    }

    pub fn get(&self, joint: JointId) -> f64 {
        self.angles[joint.index()]
    }

    pub fn set(&mut self, joint: JointId, degrees: f64) {
        self.angles[joint.index()] = degrees;
    }

    pub fn with(mut self, joint: JointId, degrees: f64) -> Self {
        self.set(joint, degrees);
        self
    }

    pub fn angle(&self, digit: Digit, role: JointRole) -> f64 {
        self.get(JointId::new(digit, role))
    }

    pub fn iter(&self) -> impl Iterator<Item = (JointId, f64)> + '_ {
        JointId::all().zip(self.angles.iter().copied())
    }

    pub fn is_finite(&self) -> bool {
        self.angles.iter().all(|a| a.is_finite())
    }

    /// Largest absolute per-joint difference.
    pub fn max_abs_diff(&self, other: &HandPose) -> f64 {
        self.angles
            .iter()
            .zip(other.angles.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<JointId> for HandPose {
    type Output = f64;

    fn index(&self, joint: JointId) -> &f64 {
        &self.angles[joint.index()]
    }
}

impl IndexMut<JointId> for HandPose {
    fn index_mut(&mut self, joint: JointId) -> &mut f64 {
        &mut self.angles[joint.index()]
    }
}

struct DigitAngles<'a>(&'a [f64]);

impl Serialize for DigitAngles<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(4))?;
        for (role, angle) in JointRole::ALL.iter().zip(self.0) {
            map.serialize_entry(role.name(), angle)?;
        }
        map.end()
    }
}

/// `{"Thumb": {"J1_Distal": 0.0, ...}, ...}` in canonical order.
impl Serialize for HandPose {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(5))?;
        for digit in Digit::ALL {
            let start = digit.index() * 4;
            map.serialize_entry(digit.name(), &DigitAngles(&self.angles[start..start + 4]))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for HandPose {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<String, BTreeMap<String, f64>>::deserialize(deserializer)?;
        let mut seen = [false; JointId::COUNT];
        let mut pose = HandPose::zero();
        for (digit_name, roles) in &raw {
            let digit: Digit = digit_name.parse().map_err(de::Error::custom)?;
            for (role_name, &angle) in roles {
                let role: JointRole = role_name.parse().map_err(de::Error::custom)?;
                let joint = JointId::new(digit, role);
                if !angle.is_finite() {
                    return Err(de::Error::custom(format!(
                        "angle for {joint} is not finite"
                    )));
                }
                if seen[joint.index()] {
                    return Err(de::Error::custom(format!("duplicate joint {joint}")));
                }
                seen[joint.index()] = true;
                pose.set(joint, angle);
            }
        }
        if let Some(missing) = JointId::all().find(|j| !seen[j.index()]) {
            return Err(de::Error::custom(format!("missing joint {missing}")));
        }
        Ok(pose)
    }
}
