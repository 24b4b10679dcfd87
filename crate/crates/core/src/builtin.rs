//! Data shipped with the crate.

use crate::actuation::CouplingConfig;
use crate::benchmark::{load_suite, TaskDef};
use crate::choreography::ManipulationScript;
use crate::error::{Error, Result};
use crate::gestures::{GestureSet, LoadMode};
use crate::hand::HandSpec;

pub const HAND_SPEC_JSON: &str = include_str!("../data/hand_spec.json");
pub const GESTURES_JSON: &str = include_str!("../data/gestures.json");
pub const SUITE_JSON: &str = include_str!("../data/suite.json");

/// `(name, document)` for every bundled manipulation script.
pub const SCRIPTS: [(&str, &str); 7] = [
    (
        "pen_rotation",
        include_str!("../data/scripts/pen_rotation.json"),
    ),
    (
        "ball_rotation",
        include_str!("../data/scripts/ball_rotation.json"),
    ),
    ("crawling", include_str!("../data/scripts/crawling.json")),
    ("pen_spin", include_str!("../data/scripts/pen_spin.json")),
    (
        "balloon_flick",
        include_str!("../data/scripts/balloon_flick.json"),
    ),
    ("climbing", include_str!("../data/scripts/climbing.json")),
    (
        "rubiks_cube",
        include_str!("../data/scripts/rubiks_cube.json"),
    ),
];

pub fn hand_spec() -> HandSpec {
    HandSpec::from_json(HAND_SPEC_JSON).expect("bundled hand spec is valid")
}

pub fn coupling() -> CouplingConfig {
    CouplingConfig::from_spec(&hand_spec()).expect("bundled hand spec yields a coupling")
}

pub fn gesture_set() -> GestureSet {
    GestureSet::load(GESTURES_JSON, &hand_spec(), LoadMode::Strict)
        .expect("bundled gesture set is valid")
        .0
}

/// Looks up a bundled script by name.
pub fn script(name: &str) -> Result<ManipulationScript> {
    let (_, text) = SCRIPTS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownName {
            kind: "script",
            name: name.to_string(),
        })?;
    ManipulationScript::from_json(text)
}

/// The bundled three-level suite.
pub fn suite() -> Vec<TaskDef> {
    load_suite(SUITE_JSON, script).expect("bundled suite is valid")
}
