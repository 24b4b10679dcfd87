//! Digit and joint identifiers shared by every module.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// One of the five digits, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Digit {
    Thumb,
    Index,
    Middle,
    Ring,
    Little,
}

impl Digit {
    pub const ALL: [Digit; 5] = [
        Digit::Thumb,
        Digit::Index,
        Digit::Middle,
        Digit::Ring,
        Digit::Little,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Digit::Thumb => "Thumb",
            Digit::Index => "Index",
            Digit::Middle => "Middle",
            Digit::Ring => "Ring",
            Digit::Little => "Little",
        }
    }

    /// Lower-case key used in CSV headers.
    pub fn key(self) -> &'static str {
        match self {
            Digit::Thumb => "thumb",
            Digit::Index => "index",
            Digit::Middle => "middle",
            Digit::Ring => "ring",
            Digit::Little => "little",
        }
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Digit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Digit::ALL
            .into_iter()
            .find(|d| d.name() == s || d.key() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "digit",
                name: s.to_string(),
            })
    }
}

/// Joint position along a digit.
///
/// `Distal` is the DIP joint (thumb: IP), `Middle` the PIP joint (thumb: MCP),
/// `Base` the MCP flexion joint (thumb: CMC flexion) and `AbdAdd` the
/// abduction/adduction axis of the base joint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum JointRole {
    #[serde(rename = "J1_Distal")]
    Distal,
    #[serde(rename = "J2_Middle")]
    Middle,
    #[serde(rename = "J3_Base")]
    Base,
    #[serde(rename = "J4_AbdAdd")]
    AbdAdd,
}

impl JointRole {
    pub const ALL: [JointRole; 4] = [
        JointRole::Distal,
        JointRole::Middle,
        JointRole::Base,
        JointRole::AbdAdd,
    ];

    /// Flexion roles from the fingertip inwards.
    pub const FLEXION: [JointRole; 3] = [JointRole::Distal, JointRole::Middle, JointRole::Base];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            JointRole::Distal => "J1_Distal",
            JointRole::Middle => "J2_Middle",
            JointRole::Base => "J3_Base",
            JointRole::AbdAdd => "J4_AbdAdd",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            JointRole::Distal => "j1_distal",
            JointRole::Middle => "j2_middle",
            JointRole::Base => "j3_base",
            JointRole::AbdAdd => "j4_abdadd",
        }
    }
}

impl fmt::Display for JointRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for JointRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JointRole::ALL
            .into_iter()
            .find(|r| r.name() == s || r.key() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "joint role",
                name: s.to_string(),
            })
    }
}

/// A (digit, role) pair. Orders canonically: digit-major, then role.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointId {
    pub digit: Digit,
    pub role: JointRole,
}

impl JointId {
    pub const COUNT: usize = 20;

    pub const fn new(digit: Digit, role: JointRole) -> Self {
        JointId { digit, role }
    }

    pub fn index(self) -> usize {
        self.digit.index() * 4 + self.role.index()
    }

    pub fn from_index(i: usize) -> Self {
        JointId::new(Digit::ALL[i / 4], JointRole::ALL[i % 4])
    }

    /// All 20 joints in canonical order.
    pub fn all() -> impl Iterator<Item = JointId> + Clone {
        (0..Self::COUNT).map(JointId::from_index)
    }

    /// `thumb_j1_distal` style column name.
    pub fn column(self) -> String {
        format!("{}_{}", self.digit.key(), self.role.key())
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.digit, self.role)
    }
}

/// Parses `Index.J3_Base`, `index.j3_base` or `index_j3_base`.
impl FromStr for JointId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || Error::UnknownName {
            kind: "joint",
            name: s.to_string(),
        };
        let (digit, role) = s
            .split_once('.')
            .or_else(|| s.split_once('_'))
            .ok_or_else(unknown)?;
        Ok(JointId::new(
            digit.parse().map_err(|_| unknown())?,
            role.parse().map_err(|_| unknown())?,
        ))
    }
}

impl Serialize for JointId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for JointId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// A value for each digit. Serializes as a JSON object in canonical digit
/// order; deserializing requires all five keys.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct PerDigit<T>(pub [T; 5]);

impl<T> PerDigit<T> {
    pub fn get(&self, digit: Digit) -> &T {
        &self.0[digit.index()]
    }

    pub fn get_mut(&mut self, digit: Digit) -> &mut T {
        &mut self.0[digit.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Digit, &T)> {
        Digit::ALL.into_iter().zip(self.0.iter())
    }
}

impl<T: Serialize> Serialize for PerDigit<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(5))?;
        for (digit, value) in self.iter() {
            map.serialize_entry(digit.name(), value)?;
        }
        map.end()
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for PerDigit<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PerDigitVisitor<T>(std::marker::PhantomData<T>);

        impl<'de, T: Deserialize<'de>> Visitor<'de> for PerDigitVisitor<T> {
            type Value = PerDigit<T>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object keyed by digit name")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut slots: [Option<T>; 5] = Default::default();
                while let Some(key) = access.next_key::<String>()? {
                    let digit: Digit = key.parse().map_err(de::Error::custom)?;
                    if slots[digit.index()].is_some() {
                        return Err(de::Error::custom(format!("duplicate digit {digit}")));
                    }
                    slots[digit.index()] = Some(access.next_value()?);
                }
                let mut out = Vec::with_capacity(5);
                for (digit, slot) in Digit::ALL.into_iter().zip(slots) {
                    out.push(
                        slot.ok_or_else(|| de::Error::custom(format!("missing digit {digit}")))?,
                    );
                }
                match out.try_into() {
                    Ok(arr) => Ok(PerDigit(arr)),
                    Err(_) => unreachable!("five digits collected"),
                }
            }
        }

        deserializer.deserialize_map(PerDigitVisitor(std::marker::PhantomData))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_indices_are_canonical() {
        let ids: Vec<_> = JointId::all().collect();
        assert_eq!(ids.len(), 20);
        for (i, id) in ids.iter().enumerate() {
            assert_eq!(id.index(), i);
        }
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(sorted, ids);
        assert_eq!(ids[0], JointId::new(Digit::Thumb, JointRole::Distal));
        assert_eq!(ids[19], JointId::new(Digit::Little, JointRole::AbdAdd));
    }

    #[test]
    fn joint_names_parse() {
        let id: JointId = "Little.J4_AbdAdd".parse().unwrap();
        assert_eq!(id, JointId::new(Digit::Little, JointRole::AbdAdd));
        assert_eq!(id.to_string(), "Little.J4_AbdAdd");
        assert_eq!(
            "index_j3_base".parse::<JointId>().unwrap().column(),
            "index_j3_base"
        );
        assert!("Pinky.J1_Distal".parse::<JointId>().is_err());
        assert!("Index".parse::<JointId>().is_err());
    }

    #[test]
    fn per_digit_requires_all_keys() {
        let ok: PerDigit<f64> =
            serde_json::from_str(r#"{"Little":5,"Thumb":1,"Index":2,"Middle":3,"Ring":4}"#)
                .unwrap();
        assert_eq!(ok.0, [1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(
            serde_json::to_string(&ok).unwrap(),
            r#"{"Thumb":1.0,"Index":2.0,"Middle":3.0,"Ring":4.0,"Little":5.0}"#
        );
        assert!(serde_json::from_str::<PerDigit<f64>>(r#"{"Thumb":1}"#).is_err());
    }
}
