//! Locating hand spec, gesture set, scripts and suites.
//!
//! `default` means the shipped data: files under the data directory when one
//! is configured, the copies compiled into the library otherwise.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use handkin::benchmark::{load_suite, TaskDef};
use handkin::gestures::GestureWarning;
use handkin::{builtin, CouplingConfig, GestureSet, HandSpec, LoadMode, ManipulationScript};

pub const DEFAULT: &str = "default";

pub struct DataSource {
    pub dir: Option<PathBuf>,
}

pub struct Loaded {
    pub spec_text: String,
    pub spec: HandSpec,
    pub coupling: CouplingConfig,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

impl DataSource {
    fn shipped(&self, relative: &str, embedded: &str) -> Result<String> {
        match &self.dir {
            Some(dir) => read(&dir.join(relative)),
            None => Ok(embedded.to_string()),
        }
    }

    pub fn hand_spec(&self, arg: &str) -> Result<Loaded> {
        let spec_text = if arg == DEFAULT {
            self.shipped("hand_spec.json", builtin::HAND_SPEC_JSON)?
        } else {
            read(Path::new(arg))?
        };
        let spec = HandSpec::from_json(&spec_text).context("invalid hand spec")?;
        let coupling = CouplingConfig::from_spec(&spec)?;
        Ok(Loaded {
            spec_text,
            spec,
            coupling,
        })
    }

    pub fn gesture_text(&self, arg: &str) -> Result<String> {
        if arg == DEFAULT {
            self.shipped("gestures.json", builtin::GESTURES_JSON)
        } else {
            read(Path::new(arg))
        }
    }

    pub fn gestures(
        &self,
        arg: &str,
        spec: &HandSpec,
        mode: LoadMode,
    ) -> Result<(GestureSet, Vec<GestureWarning>)> {
        let text = self.gesture_text(arg)?;
        GestureSet::load(&text, spec, mode).context("invalid gesture set")
    }

    /// Bundled script by name.
    pub fn named_script(&self, name: &str) -> Result<ManipulationScript> {
        match &self.dir {
            Some(dir) => {
                let text = read(&dir.join("scripts").join(format!("{name}.json")))?;
                Ok(ManipulationScript::from_json(&text)?)
            }
            None => Ok(builtin::script(name)?),
        }
    }

    /// A script file, falling back to the bundled script of the same name
    /// when a `scripts/<name>.json` path does not exist locally.
    pub fn script(&self, arg: &str) -> Result<ManipulationScript> {
        let path = Path::new(arg);
        if !path.exists() {
            let bundled = path
                .file_stem()
                .and_then(|s| s.to_str())
                .filter(|name| builtin::SCRIPTS.iter().any(|(n, _)| n == name))
                .filter(|_| {
                    let parent = path.parent().and_then(|p| p.to_str()).unwrap_or("");
                    parent.is_empty() || parent == "scripts"
                });
            if let Some(name) = bundled {
                return self.named_script(name);
            }
        }
        let text = read(path)?;
        ManipulationScript::from_json(&text).with_context(|| format!("invalid script {arg}"))
    }

    pub fn suite(&self, arg: &str) -> Result<Vec<TaskDef>> {
        let text = if arg == "all" || arg == DEFAULT {
            self.shipped("suite.json", builtin::SUITE_JSON)?
        } else {
            read(Path::new(arg))?
        };
        let resolve = |name: &str| {
            self.named_script(name)
                .map_err(|e| handkin::Error::Config(format!("script `{name}`: {e:#}")))
        };
        load_suite(&text, resolve).context("invalid suite")
    }
}
