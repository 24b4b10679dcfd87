//! How much of one range-of-motion envelope another one reproduces.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Envelope, HandSpec};
use crate::error::{Error, Result};
use crate::joint::JointId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Mean of per-joint overlap ratios.
    PerJointMean,
    /// Total overlap length over total reference length.
    LengthWeighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbsentPolicy {
    ExcludeAbsent,
    IncludeAbsentAsZero,
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-joint-mean" => Ok(Aggregation::PerJointMean),
            "length-weighted" => Ok(Aggregation::LengthWeighted),
            _ => Err(Error::UnknownName {
                kind: "aggregation",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::PerJointMean => "per-joint-mean",
            Aggregation::LengthWeighted => "length-weighted",
        })
    }
}

impl fmt::Display for AbsentPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AbsentPolicy::ExcludeAbsent => "exclude-absent",
            AbsentPolicy::IncludeAbsentAsZero => "include-absent-as-zero",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointCoverage {
    pub joint: JointId,
    pub overlap: f64,
    pub reference_length: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coverage {
    pub target: Envelope,
    pub reference: Envelope,
    pub aggregation: Aggregation,
    pub value: f64,
    pub joints: Vec<JointCoverage>,
    pub excluded: Vec<JointId>,
    pub warnings: Vec<String>,
}

/// Fraction of the `reference` envelope covered by the `target` envelope.
///
/// Per joint the ratio is `|target ∩ reference| / |reference|`. Reference
/// intervals of zero length are skipped with a warning.
pub fn rom_coverage(
    spec: &HandSpec,
    target: Envelope,
    reference: Envelope,
    aggregation: Aggregation,
    absent: AbsentPolicy,
) -> Result<Coverage> {
    let mut joints = Vec::new();
    let mut excluded = Vec::new();
    let mut warnings = Vec::new();

    for joint in JointId::all() {
        let Some(reference_range) = spec.envelope(joint, reference) else {
            warnings.push(format!("{joint}: no {reference} envelope, excluded"));
            excluded.push(joint);
            continue;
        };
        let reference_length = reference_range.length();
        if reference_length <= 0.0 {
            warnings.push(format!(
                "{joint}: zero-length {reference} envelope, excluded"
            ));
            excluded.push(joint);
            continue;
        }
        let overlap = match (spec.envelope(joint, target), absent) {
            (Some(t), _) => t.overlap(&reference_range),
            (None, AbsentPolicy::IncludeAbsentAsZero) => 0.0,
            (None, AbsentPolicy::ExcludeAbsent) => {
                excluded.push(joint);
                continue;
            }
        };
        joints.push(JointCoverage {
            joint,
            overlap,
            reference_length,
            ratio: overlap / reference_length,
        });
    }

    if joints.is_empty() {
        return Err(Error::Config(format!(
            "no joints left to compare {target} against {reference}"
        )));
    }

    let value = match aggregation {
        Aggregation::PerJointMean => {
            joints.iter().map(|j| j.ratio).sum::<f64>() / joints.len() as f64
        }
        Aggregation::LengthWeighted => {
            let covered: f64 = joints.iter().map(|j| j.overlap).sum();
            let total: f64 = joints.iter().map(|j| j.reference_length).sum();
            covered / total
        }
    };

    Ok(Coverage {
        target,
        reference,
        aggregation,
        value,
        joints,
        excluded,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::joint::{Digit, JointRole};

    #[test]
    fn self_coverage_is_one() {
        let spec = builtin::hand_spec();
        for env in [Envelope::Human, Envelope::Grasping] {
            for agg in [Aggregation::PerJointMean, Aggregation::LengthWeighted] {
                for absent in [
                    AbsentPolicy::ExcludeAbsent,
                    AbsentPolicy::IncludeAbsentAsZero,
                ] {
                    let c = rom_coverage(&spec, env, env, agg, absent).unwrap();
                    assert_eq!(c.value, 1.0);
                    assert!(c.excluded.is_empty());
                }
            }
        }
    }

    #[test]
    fn ours_reference_excludes_ring_abduction_with_warning() {
        let spec = builtin::hand_spec();
        let c = rom_coverage(
            &spec,
            Envelope::Ours,
            Envelope::Ours,
            Aggregation::PerJointMean,
            AbsentPolicy::IncludeAbsentAsZero,
        )
        .unwrap();
        assert_eq!(c.value, 1.0);
        assert_eq!(
            c.excluded,
            vec![JointId::new(Digit::Ring, JointRole::AbdAdd)]
        );
        assert_eq!(c.warnings.len(), 1);
    }

    #[test]
    fn include_absent_counts_zero() {
        let spec = builtin::hand_spec();
        let excl = rom_coverage(
            &spec,
            Envelope::Ours,
            Envelope::Human,
            Aggregation::PerJointMean,
            AbsentPolicy::ExcludeAbsent,
        )
        .unwrap();
        let incl = rom_coverage(
            &spec,
            Envelope::Ours,
            Envelope::Human,
            Aggregation::PerJointMean,
            AbsentPolicy::IncludeAbsentAsZero,
        )
        .unwrap();
        assert_eq!(excl.joints.len(), 19);
        assert_eq!(incl.joints.len(), 20);
        assert!((incl.value - excl.value * 19.0 / 20.0).abs() < 1e-12);
    }
}
