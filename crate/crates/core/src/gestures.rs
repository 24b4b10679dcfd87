//! Base-gesture dataset: loading, validation, lookup and the Kapandji score.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::actuation::{coupling_residual, CouplingConfig};
use crate::error::{Error, Result};
use crate::hand::{validate_pose, Envelope, HandPose, HandSpec, Violation};

/// Largest coupling residual, in degrees, for a pose to count as executable.
pub const RESIDUAL_TOLERANCE_DEG: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GestureCategory {
    FeixGrasp,
    Kapandji,
    TranslationRotation,
}

impl GestureCategory {
    pub const ALL: [GestureCategory; 3] = [
        GestureCategory::FeixGrasp,
        GestureCategory::Kapandji,
        GestureCategory::TranslationRotation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GestureCategory::FeixGrasp => "FeixGrasp",
            GestureCategory::Kapandji => "Kapandji",
            GestureCategory::TranslationRotation => "TranslationRotation",
        }
    }
}

impl fmt::Display for GestureCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GestureCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GestureCategory::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "gesture category",
                name: s.to_string(),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GestureSource {
    Measured,
    Authored,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GestureRecord {
    pub id: String,
    pub name: String,
    pub category: GestureCategory,
    pub source: GestureSource,
    pub pose: HandPose,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// Envelope violations abort the load.
    #[default]
    Strict,
    /// Envelope violations are reported as warnings and the records kept.
    Lenient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GestureSet {
    hand_spec_ref: String,
    gestures: Vec<GestureRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GestureWarning {
    pub id: String,
    pub violations: Vec<Violation>,
}

impl GestureSet {
    /// Builds a set, enforcing unique non-empty ids and names.
    pub fn new(hand_spec_ref: impl Into<String>, gestures: Vec<GestureRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, g) in gestures.iter().enumerate() {
            if g.id.is_empty() {
                return Err(Error::schema(
                    format!("gestures[{i}].id"),
                    "id must not be empty",
                ));
            }
            if g.name.trim().is_empty() {
                return Err(Error::schema(
                    format!("gestures[{i}].name"),
                    "name must not be empty",
                ));
            }
            if !seen.insert(g.id.as_str()) {
                return Err(Error::DuplicateId(g.id.clone()));
            }
        }
        Ok(GestureSet {
            hand_spec_ref: hand_spec_ref.into(),
            gestures,
        })
    }

    /// Parses a gesture-set document and checks every pose against the
    /// actuated envelope of `spec`.
    pub fn load(
        text: &str,
        spec: &HandSpec,
        mode: LoadMode,
    ) -> Result<(Self, Vec<GestureWarning>)> {
        let doc: GestureSet = serde_json::from_str(text)?;
        let set = GestureSet::new(doc.hand_spec_ref, doc.gestures)?;
        let mut warnings = Vec::new();
        for g in &set.gestures {
            let violations = validate_pose(&g.pose, spec, Envelope::Ours);
            if violations.is_empty() {
                continue;
            }
            if mode == LoadMode::Strict {
                return Err(Error::GestureViolations {
                    id: g.id.clone(),
                    details: violations.iter().map(ToString::to_string).collect(),
                });
            }
            warnings.push(GestureWarning {
                id: g.id.clone(),
                violations,
            });
        }
        Ok((set, warnings))
    }

    /// Canonical pretty-printed JSON.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("gesture set serializes");
        text.push('\n');
        text
    }

    pub fn hand_spec_ref(&self) -> &str {
        &self.hand_spec_ref
    }

    pub fn records(&self) -> &[GestureRecord] {
        &self.gestures
    }

    pub fn len(&self) -> usize {
        self.gestures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gestures.is_empty()
    }

    pub fn by_category(&self, category: GestureCategory) -> impl Iterator<Item = &GestureRecord> {
        self.gestures.iter().filter(move |g| g.category == category)
    }

    /// Case-sensitive lookup. Misses carry up to three close ids.
    pub fn find(&self, id: &str) -> Result<&GestureRecord> {
        self.gestures
            .iter()
            .find(|g| g.id == id)
            .ok_or_else(|| Error::NotFound {
                id: id.to_string(),
                suggestions: self.suggest(id),
            })
    }

    fn suggest(&self, id: &str) -> Vec<String> {
        let needle = id.to_lowercase();
        let limit = (needle.chars().count() / 4).max(2);
        let mut scored: Vec<(usize, &str)> = self
            .gestures
            .iter()
            .map(|g| (strsim::levenshtein(&needle, &g.id), g.id.as_str()))
            .filter(|(d, _)| *d <= limit)
            .collect();
        scored.sort();
        scored
            .into_iter()
            .take(3)
            .map(|(_, s)| s.to_string())
            .collect()
    }
}

/// Executability of a single pose on the hand.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Executability {
    pub violations: Vec<Violation>,
    pub residual: f64,
}

impl Executability {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.residual <= RESIDUAL_TOLERANCE_DEG
    }
}

/// A pose is executable when it lies inside the actuated envelope and the
/// coupling can reproduce it within [`RESIDUAL_TOLERANCE_DEG`].
pub fn check_executable(
    pose: &HandPose,
    spec: &HandSpec,
    coupling: &CouplingConfig,
) -> Executability {
    Executability {
        violations: validate_pose(pose, spec, Envelope::Ours),
        residual: coupling_residual(pose, coupling),
    }
}

/// Kapandji position encoded in a record id such as `kapandji_7`.
pub fn kapandji_position(record: &GestureRecord) -> Option<u8> {
    record
        .id
        .rsplit('_')
        .next()
        .and_then(|tail| tail.parse().ok())
}

/// Highest Kapandji score `k` such that positions `0..=k` are all present and
/// executable. `None` when position 0 already fails.
pub fn kapandji_score(
    set: &GestureSet,
    spec: &HandSpec,
    coupling: &CouplingConfig,
) -> Result<Option<u8>> {
    let mut positions: Vec<(u8, &GestureRecord)> = Vec::new();
    for record in set.by_category(GestureCategory::Kapandji) {
        let k = kapandji_position(record).ok_or_else(|| {
            Error::Config(format!(
                "Kapandji record `{}` has no position suffix",
                record.id
            ))
        })?;
        if positions.iter().any(|(p, _)| *p == k) {
            return Err(Error::Config(format!(
                "Kapandji position {k} appears twice"
            )));
        }
        positions.push((k, record));
    }
    if positions.is_empty() {
        return Err(Error::Config("gesture set has no Kapandji records".into()));
    }
    positions.sort_by_key(|(k, _)| *k);

    let mut score = None;
    for (expected, (k, record)) in (0u8..).zip(&positions) {
        if *k != expected || !check_executable(&record.pose, spec, coupling).passed() {
            break;
        }
        score = Some(*k);
    }
    Ok(score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::joint::{Digit, JointId, JointRole};

    fn record(id: &str, category: GestureCategory) -> GestureRecord {
        GestureRecord {
            id: id.into(),
            name: id.into(),
            category,
            source: GestureSource::Authored,
            pose: HandPose::zero(),
            notes: None,
        }
    }

    #[test]
    fn builtin_set_has_expected_shape() {
        let set = builtin::gesture_set();
        assert_eq!(set.len(), 62);
        assert_eq!(set.by_category(GestureCategory::FeixGrasp).count(), 33);
        assert_eq!(set.by_category(GestureCategory::Kapandji).count(), 11);
        assert_eq!(
            set.by_category(GestureCategory::TranslationRotation)
                .count(),
            18
        );
        assert_eq!(set.to_json(), builtin::GESTURES_JSON);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let err = GestureSet::new(
            "x",
            vec![
                record("tripod", GestureCategory::FeixGrasp),
                record("tripod", GestureCategory::FeixGrasp),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateId(id) if id == "tripod"));
    }

    #[test]
    fn strict_and_lenient_loading() {
        let spec = builtin::hand_spec();
        let mut bad = record("bad", GestureCategory::FeixGrasp);
        bad.pose
            .set(JointId::new(Digit::Index, JointRole::Base), 95.0);
        let set =
            GestureSet::new("x", vec![record("ok", GestureCategory::FeixGrasp), bad]).unwrap();
        let text = set.to_json();

        let err = GestureSet::load(&text, &spec, LoadMode::Strict).unwrap_err();
        assert!(
            matches!(&err, Error::GestureViolations { id, .. } if id == "bad"),
            "{err}"
        );

        let (loaded, warnings) = GestureSet::load(&text, &spec, LoadMode::Lenient).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].violations[0].excess, 13.0);
    }

    #[test]
    fn lookup_and_suggestions() {
        let set = builtin::gesture_set();
        assert_eq!(set.find("palmar_pinch").unwrap().name, "Palmar Pinch");
        match set.find("PALMAR_PINCH").unwrap_err() {
            Error::NotFound { suggestions, .. } => {
                assert_eq!(
                    suggestions.first().map(String::as_str),
                    Some("palmar_pinch")
                )
            }
            other => panic!("{other}"),
        }
        match set.find("palmar_pnch").unwrap_err() {
            Error::NotFound { suggestions, .. } => {
                assert!(suggestions.contains(&"palmar_pinch".to_string()))
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn kapandji_first_failure() {
        let spec = builtin::hand_spec();
        let coupling = CouplingConfig::from_spec(&spec).unwrap();
        let set = builtin::gesture_set();
        assert_eq!(kapandji_score(&set, &spec, &coupling).unwrap(), Some(10));

        let mut records = set.records().to_vec();
        let seven = records.iter_mut().find(|r| r.id == "kapandji_7").unwrap();
        seven
            .pose
            .set(JointId::new(Digit::Thumb, JointRole::Base), 80.0);
        let perturbed = GestureSet::new("x", records).unwrap();
        assert_eq!(
            kapandji_score(&perturbed, &spec, &coupling).unwrap(),
            Some(6)
        );

        let none =
            GestureSet::new("x", vec![record("tripod", GestureCategory::FeixGrasp)]).unwrap();
        assert!(matches!(
            kapandji_score(&none, &spec, &coupling),
            Err(Error::Config(_))
        ));
    }
}
