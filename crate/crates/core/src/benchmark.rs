//! Three-level manipulation benchmark, judged kinematically.
//!
//! Level 1 runs single gestures, level 2 compiles multi-gesture scripts and
//! checks the trajectory, level 3 additionally enforces a time and/or
//! gesture budget.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize, Serializer};

use crate::actuation::CouplingConfig;
use crate::choreography::{
    compile_script, trajectory_metrics, validate_trajectory_with, ManipulationScript,
    TrajectoryMetrics, DEFAULT_MAX_STEP_DEG,
};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::gestures::{check_executable, GestureSet, RESIDUAL_TOLERANCE_DEG};
use crate::hand::{HandSpec, Violation};
use crate::joint::JointId;

/// Number of gestures in the level-1 suite.
pub const LEVEL1_GESTURES: usize = 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BenchmarkLevel {
    #[serde(rename = "L1_Single")]
    Single,
    #[serde(rename = "L2_Complex")]
    Complex,
    #[serde(rename = "L3_CCM")]
    Continuous,
}

impl BenchmarkLevel {
    pub const ALL: [BenchmarkLevel; 3] = [
        BenchmarkLevel::Single,
        BenchmarkLevel::Complex,
        BenchmarkLevel::Continuous,
    ];

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkLevel::Single => "L1_Single",
            BenchmarkLevel::Complex => "L2_Complex",
            BenchmarkLevel::Continuous => "L3_CCM",
        }
    }
}

impl fmt::Display for BenchmarkLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Level-3 limits. An absent field is unbounded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_gestures: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TaskPayload {
    Gesture(String),
    Script(ManipulationScript),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskDef {
    pub id: String,
    pub level: BenchmarkLevel,
    pub payload: TaskPayload,
    pub budget: Option<Budget>,
}

impl TaskDef {
    pub fn new(
        id: impl Into<String>,
        level: BenchmarkLevel,
        payload: TaskPayload,
        budget: Option<Budget>,
    ) -> Result<Self> {
        let id = id.into();
        let payload_ok = matches!(
            (level, &payload),
            (BenchmarkLevel::Single, TaskPayload::Gesture(_))
                | (
                    BenchmarkLevel::Complex | BenchmarkLevel::Continuous,
                    TaskPayload::Script(_)
                )
        );
        if !payload_ok {
            return Err(Error::schema(
                &id,
                format!("payload kind does not match {level}"),
            ));
        }
        match (level, budget.is_some()) {
            (BenchmarkLevel::Continuous, false) => {
                Err(Error::schema(&id, "level-3 tasks need a budget"))
            }
            (BenchmarkLevel::Single | BenchmarkLevel::Complex, true) => {
                Err(Error::schema(&id, format!("{level} tasks take no budget")))
            }
            _ => Ok(TaskDef {
                id,
                level,
                payload,
                budget,
            }),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScriptRef {
    Named(String),
    Inline(Box<ManipulationScript>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskDoc {
    id: String,
    level: BenchmarkLevel,
    #[serde(default)]
    gesture: Option<String>,
    #[serde(default)]
    script: Option<ScriptRef>,
    #[serde(default)]
    budget: Option<Budget>,
}

/// Parses a suite document: a JSON array of tasks. A task's `script` is
/// either an inline script object or a name handed to `resolve`.
pub fn load_suite(
    text: &str,
    resolve: impl Fn(&str) -> Result<ManipulationScript>,
) -> Result<Vec<TaskDef>> {
    let docs: Vec<TaskDoc> = serde_json::from_str(text)?;
    docs.into_iter()
        .enumerate()
        .map(|(i, doc)| {
            let payload = match (doc.gesture, doc.script) {
                (Some(g), None) => TaskPayload::Gesture(g),
                (None, Some(ScriptRef::Inline(s))) => TaskPayload::Script(*s),
                (None, Some(ScriptRef::Named(name))) => TaskPayload::Script(resolve(&name)?),
                _ => {
                    return Err(Error::schema(
                        format!("[{i}]"),
                        "exactly one of `gesture` or `script` is required",
                    ))
                }
            };
            TaskDef::new(doc.id, doc.level, payload, doc.budget)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    PoseViolation {
        #[serde(flatten)]
        violation: Violation,
    },
    TrajectoryViolation {
        joint: JointId,
        frames: usize,
        first_frame: usize,
        worst_excess: f64,
    },
    Residual {
        frame: Option<usize>,
        residual_deg: f64,
        tolerance_deg: f64,
    },
    StepExceeded {
        key_frame: usize,
        step_deg: f64,
        limit_deg: f64,
        suggested_interval: usize,
    },
    BudgetExceeded {
        budget: String,
        limit: f64,
        measured: f64,
        excess: f64,
    },
    Unresolved {
        message: String,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::PoseViolation { violation } => write!(f, "{violation}"),
            Diagnostic::TrajectoryViolation {
                joint,
                frames,
                first_frame,
                worst_excess,
            } => write!(
                f,
                "{joint} out of range on {frames} frame(s) from frame {first_frame}, worst {worst_excess:+}°"
            ),
            Diagnostic::Residual {
                frame,
                residual_deg,
                tolerance_deg,
            } => match frame {
                Some(fr) => write!(f, "coupling residual {residual_deg:.3}° > {tolerance_deg}° at frame {fr}"),
                None => write!(f, "coupling residual {residual_deg:.3}° > {tolerance_deg}°"),
            },
            Diagnostic::StepExceeded {
                key_frame,
                step_deg,
                limit_deg,
                suggested_interval,
            } => write!(
                f,
                "segment to key frame {key_frame} steps {step_deg:.3}°/frame > {limit_deg}°, use T >= {suggested_interval}"
            ),
            Diagnostic::BudgetExceeded {
                budget,
                limit,
                measured,
                excess,
            } => write!(f, "{budget} {measured} exceeds {limit} by {excess}"),
            Diagnostic::Unresolved { message } => f.write_str(message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaskResult {
    pub task_id: String,
    pub level: BenchmarkLevel,
    pub passed: bool,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<TrajectoryMetrics>,
}

impl TaskResult {
    fn from_diagnostics(
        task: &TaskDef,
        diagnostics: Vec<Diagnostic>,
        measured: Option<TrajectoryMetrics>,
    ) -> Self {
        TaskResult {
            task_id: task.id.clone(),
            level: task.level,
            passed: diagnostics.is_empty(),
            diagnostics,
            measured,
        }
    }
}

/// Shared, read-only inputs for running tasks.
#[derive(Clone, Copy, Debug)]
pub struct Bench<'a> {
    pub spec: &'a HandSpec,
    pub gestures: &'a GestureSet,
    pub coupling: &'a CouplingConfig,
    pub max_step_deg: f64,
    pub mode: ExecMode,
}

impl<'a> Bench<'a> {
    pub fn new(spec: &'a HandSpec, gestures: &'a GestureSet, coupling: &'a CouplingConfig) -> Self {
        Bench {
            spec,
            gestures,
            coupling,
            max_step_deg: DEFAULT_MAX_STEP_DEG,
            mode: ExecMode::default(),
        }
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_max_step(mut self, max_step_deg: f64) -> Self {
        self.max_step_deg = max_step_deg;
        self
    }
}

fn gesture_diagnostics(id: &str, bench: &Bench) -> Vec<Diagnostic> {
    let record = match bench.gestures.find(id) {
        Ok(r) => r,
        Err(e) => {
            return vec![Diagnostic::Unresolved {
                message: e.to_string(),
            }]
        }
    };
    let check = check_executable(&record.pose, bench.spec, bench.coupling);
    let mut out: Vec<Diagnostic> = check
        .violations
        .into_iter()
        .map(|violation| Diagnostic::PoseViolation { violation })
        .collect();
    if check.residual > RESIDUAL_TOLERANCE_DEG {
        out.push(Diagnostic::Residual {
            frame: None,
            residual_deg: check.residual,
            tolerance_deg: RESIDUAL_TOLERANCE_DEG,
        });
    }
    out
}

fn script_diagnostics(
    script: &ManipulationScript,
    bench: &Bench,
) -> (Vec<Diagnostic>, Option<TrajectoryMetrics>) {
    let trajectory = match compile_script(script, bench.gestures) {
        Ok(t) => t,
        Err(e) => {
            return (
                vec![Diagnostic::Unresolved {
                    message: e.to_string(),
                }],
                None,
            )
        }
    };
    let report = validate_trajectory_with(
        &trajectory,
        bench.spec,
        bench.coupling,
        bench.max_step_deg,
        bench.mode,
    );
    let mut out = Vec::new();

    // One entry per joint: how many frames, where it starts, worst excess.
    let mut per_joint: Vec<(JointId, usize, usize, f64)> = Vec::new();
    for fv in &report.rom_violations {
        for v in &fv.violations {
            match per_joint.iter_mut().find(|(j, ..)| *j == v.joint) {
                Some(entry) => {
                    entry.1 += 1;
                    if v.excess.abs() > entry.3.abs() {
                        entry.3 = v.excess;
                    }
                }
                None => per_joint.push((v.joint, 1, fv.frame, v.excess)),
            }
        }
    }
    per_joint.sort_by_key(|e| e.0);
    out.extend(
        per_joint
            .into_iter()
            .map(
                |(joint, frames, first_frame, worst_excess)| Diagnostic::TrajectoryViolation {
                    joint,
                    frames,
                    first_frame,
                    worst_excess,
                },
            ),
    );

    if report.max_residual > RESIDUAL_TOLERANCE_DEG {
        let frame = report
            .residuals
            .iter()
            .position(|r| *r == report.max_residual);
        out.push(Diagnostic::Residual {
            frame,
            residual_deg: report.max_residual,
            tolerance_deg: RESIDUAL_TOLERANCE_DEG,
        });
    }
    out.extend(
        report
            .segments_over_limit
            .iter()
            .map(|s| Diagnostic::StepExceeded {
                key_frame: s.key_frame,
                step_deg: s.step_deg,
                limit_deg: report.step_limit_deg,
                suggested_interval: s.suggested_interval,
            }),
    );
    (out, Some(trajectory_metrics(&trajectory)))
}

fn budget_diagnostics(budget: &Budget, metrics: &TrajectoryMetrics) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if let Some(limit) = budget.max_seconds {
        if metrics.duration_s > limit {
            out.push(Diagnostic::BudgetExceeded {
                budget: "max_seconds".into(),
                limit,
                measured: metrics.duration_s,
                excess: metrics.duration_s - limit,
            });
        }
    }
    if let Some(limit) = budget.max_gestures {
        if metrics.gesture_count > limit {
            out.push(Diagnostic::BudgetExceeded {
                budget: "max_gestures".into(),
                limit: limit as f64,
                measured: metrics.gesture_count as f64,
                excess: (metrics.gesture_count - limit) as f64,
            });
        }
    }
    out
}

/// Runs one task. Failures, including unresolved gestures, are reported in
/// the result rather than returned as errors.
pub fn run_task(task: &TaskDef, bench: &Bench) -> TaskResult {
    match &task.payload {
        TaskPayload::Gesture(id) => {
            TaskResult::from_diagnostics(task, gesture_diagnostics(id, bench), None)
        }
        TaskPayload::Script(script) => {
            let (mut diagnostics, measured) = script_diagnostics(script, bench);
            if let (Some(budget), Some(metrics)) = (&task.budget, &measured) {
                diagnostics.extend(budget_diagnostics(budget, metrics));
            }
            TaskResult::from_diagnostics(task, diagnostics, measured)
        }
    }
}

/// Level-1 task for every gesture in the set, in set order.
pub fn level1_tasks(set: &GestureSet) -> Vec<TaskDef> {
    set.records()
        .iter()
        .map(|g| TaskDef {
            id: format!("l1.{}", g.id),
            level: BenchmarkLevel::Single,
            payload: TaskPayload::Gesture(g.id.clone()),
            budget: None,
        })
        .collect()
}

/// Runs the 62-gesture level-1 suite over the bench's gesture set.
pub fn run_level1(bench: &Bench) -> Result<Vec<TaskResult>> {
    let n = bench.gestures.len();
    if n != LEVEL1_GESTURES {
        return Err(Error::Config(format!(
            "level 1 needs {LEVEL1_GESTURES} gestures, the set has {n}"
        )));
    }
    let tasks = level1_tasks(bench.gestures);
    Ok(exec::map(bench.mode, &tasks, |t| run_task(t, bench)))
}

fn serialize_rate<S: Serializer>(rate: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match rate {
        Some(r) => s.serialize_f64(*r),
        None => s.serialize_str("n/a"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: BenchmarkLevel,
    pub total: usize,
    pub passed: usize,
    #[serde(serialize_with = "serialize_rate")]
    pub pass_rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub levels: Vec<LevelSummary>,
    pub total: usize,
    pub passed: usize,
    #[serde(serialize_with = "serialize_rate")]
    pub pass_rate: Option<f64>,
    pub results: Vec<TaskResult>,
}

fn rate(passed: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| passed as f64 / total as f64)
}

fn fmt_rate(r: Option<f64>) -> String {
    r.map_or_else(|| "n/a".to_string(), |r| format!("{:.1}%", r * 100.0))
}

impl Report {
    pub fn from_results(mut results: Vec<TaskResult>) -> Self {
        results.sort_by(|a, b| a.task_id.cmp(&b.task_id));
        let levels = BenchmarkLevel::ALL
            .into_iter()
            .map(|level| {
                let of_level = results.iter().filter(|r| r.level == level);
                let total = of_level.clone().count();
                let passed = of_level.filter(|r| r.passed).count();
                LevelSummary {
                    level,
                    total,
                    passed,
                    pass_rate: rate(passed, total),
                }
            })
            .collect();
        let total = results.len();
        let passed = results.iter().filter(|r| r.passed).count();
        Report {
            levels,
            total,
            passed,
            pass_rate: rate(passed, total),
            results,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Plain-text table, one section per level.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for summary in &self.levels {
            let _ = writeln!(
                out,
                "== Level {} ({}): {}/{} passed, {}",
                summary.level.number(),
                summary.level,
                summary.passed,
                summary.total,
                fmt_rate(summary.pass_rate)
            );
            for r in self.results.iter().filter(|r| r.level == summary.level) {
                let measured = r.measured.map_or_else(String::new, |m| {
                    format!(
                        "  [{:.1} s, {} gestures, {} frames]",
                        m.duration_s, m.gesture_count, m.frame_count
                    )
                });
                let _ = writeln!(
                    out,
                    "  {:<4} {}{}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.task_id,
                    measured
                );
                for d in &r.diagnostics {
                    let _ = writeln!(out, "         - {d}");
                }
            }
        }
        let _ = writeln!(
            out,
            "TOTAL {}/{} passed, {}",
            self.passed,
            self.total,
            fmt_rate(self.pass_rate)
        );
        out
    }
}

/// Runs every task and aggregates the results, ordered by task id.
pub fn run_suite(tasks: &[TaskDef], bench: &Bench) -> Report {
    Report::from_results(exec::map(bench.mode, tasks, |t| run_task(t, bench)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::choreography::KeyFrame;
    use crate::gestures::GestureRecord;
    use crate::joint::{Digit, JointRole};

    struct Fixture {
        spec: HandSpec,
        set: GestureSet,
        coupling: CouplingConfig,
    }

    fn fixture() -> Fixture {
        let spec = builtin::hand_spec();
        let coupling = CouplingConfig::from_spec(&spec).unwrap();
        Fixture {
            spec,
            set: builtin::gesture_set(),
            coupling,
        }
    }

    fn pen_task(level: BenchmarkLevel, budget: Option<Budget>) -> TaskDef {
        let script = builtin::script("pen_rotation").unwrap();
        TaskDef::new("pen", level, TaskPayload::Script(script), budget).unwrap()
    }

    #[test]
    fn task_def_invariants() {
        let script = builtin::script("pen_rotation").unwrap();
        let g = || TaskPayload::Gesture("tripod".into());
        let s = || TaskPayload::Script(script.clone());
        assert!(TaskDef::new("a", BenchmarkLevel::Single, s(), None).is_err());
        assert!(TaskDef::new("a", BenchmarkLevel::Complex, g(), None).is_err());
        assert!(TaskDef::new("a", BenchmarkLevel::Continuous, s(), None).is_err());
        assert!(TaskDef::new("a", BenchmarkLevel::Complex, s(), Some(Budget::default())).is_err());
        assert!(TaskDef::new(
            "a",
            BenchmarkLevel::Continuous,
            s(),
            Some(Budget::default())
        )
        .is_ok());
    }

    #[test]
    fn pen_rotation_levels() {
        let f = fixture();
        let bench = Bench::new(&f.spec, &f.set, &f.coupling);

        let l2 = run_task(&pen_task(BenchmarkLevel::Complex, None), &bench);
        assert!(l2.passed, "{:?}", l2.diagnostics);
        assert_eq!(l2.measured.unwrap().gesture_count, 5);

        let tight = Budget {
            max_seconds: None,
            max_gestures: Some(4),
        };
        let l3 = run_task(&pen_task(BenchmarkLevel::Continuous, Some(tight)), &bench);
        assert!(!l3.passed);
        assert_eq!(
            l3.diagnostics,
            vec![Diagnostic::BudgetExceeded {
                budget: "max_gestures".into(),
                limit: 4.0,
                measured: 5.0,
                excess: 1.0
            }]
        );

        let roomy = Budget {
            max_seconds: Some(30.0),
            max_gestures: None,
        };
        let l3 = run_task(&pen_task(BenchmarkLevel::Continuous, Some(roomy)), &bench);
        assert!(l3.passed);
        assert_eq!(l3.measured.unwrap().duration_s, 20.0);

        let unbounded = run_task(
            &pen_task(BenchmarkLevel::Continuous, Some(Budget::default())),
            &bench,
        );
        assert_eq!(unbounded.passed, l2.passed);
    }

    #[test]
    fn compile_failure_is_a_failed_result() {
        let f = fixture();
        let bench = Bench::new(&f.spec, &f.set, &f.coupling);
        let script = ManipulationScript::new(
            "bad",
            1.0,
            vec![KeyFrame::gesture("tripod", 1), KeyFrame::gesture("nope", 5)],
        )
        .unwrap();
        let task = TaskDef::new(
            "bad",
            BenchmarkLevel::Complex,
            TaskPayload::Script(script),
            None,
        )
        .unwrap();
        let r = run_task(&task, &bench);
        assert!(!r.passed);
        assert!(
            matches!(&r.diagnostics[0], Diagnostic::Unresolved { message } if message.contains("nope"))
        );
    }

    #[test]
    fn level1_cardinality_and_one_failure() {
        let f = fixture();
        let bench = Bench::new(&f.spec, &f.set, &f.coupling);
        let results = run_level1(&bench).unwrap();
        assert_eq!(results.iter().filter(|r| r.passed).count(), 62);

        let mut records: Vec<GestureRecord> = f.set.records().to_vec();
        records[3]
            .pose
            .set(JointId::new(Digit::Index, JointRole::Base), 95.0);
        let broken = GestureSet::new("x", records).unwrap();
        let bench = Bench::new(&f.spec, &broken, &f.coupling);
        let results = run_level1(&bench).unwrap();
        assert_eq!(results.iter().filter(|r| r.passed).count(), 61);

        let empty = GestureSet::new("x", vec![]).unwrap();
        let bench = Bench::new(&f.spec, &empty, &f.coupling);
        assert!(matches!(run_level1(&bench), Err(Error::Config(_))));
    }

    #[test]
    fn empty_suite_reports_na() {
        let f = fixture();
        let bench = Bench::new(&f.spec, &f.set, &f.coupling);
        let report = run_suite(&[], &bench);
        assert_eq!(report.levels.len(), 3);
        assert!(report.levels.iter().all(|l| l.pass_rate.is_none()));
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(json["pass_rate"], "n/a");
        assert!(report.render_text().contains("n/a"));
    }

    #[test]
    fn suite_rate_counts_failures() {
        let f = fixture();
        let bench = Bench::new(&f.spec, &f.set, &f.coupling);
        let tasks = vec![
            TaskDef::new(
                "a",
                BenchmarkLevel::Single,
                TaskPayload::Gesture("tripod".into()),
                None,
            )
            .unwrap(),
            TaskDef::new(
                "b",
                BenchmarkLevel::Single,
                TaskPayload::Gesture("missing".into()),
                None,
            )
            .unwrap(),
            TaskDef::new(
                "c",
                BenchmarkLevel::Single,
                TaskPayload::Gesture("palmar_pinch".into()),
                None,
            )
            .unwrap(),
        ];
        let report = run_suite(&tasks, &bench);
        assert_eq!((report.passed, report.total), (2, 3));
        assert_eq!(report.pass_rate, Some(2.0 / 3.0));
        assert!(!report.all_passed());
    }

    #[test]
    fn suite_document_parsing() {
        let text = r#"[
            {"id": "l1.tripod", "level": "L1_Single", "gesture": "tripod"},
            {"id": "l3.pen", "level": "L3_CCM", "script": "pen_rotation", "budget": {"max_seconds": 25}}
        ]"#;
        let tasks = load_suite(text, builtin::script).unwrap();
        assert_eq!(tasks.len(), 2);
        assert_eq!(tasks[1].budget.unwrap().max_seconds, Some(25.0));
        let bad = r#"[{"id": "x", "level": "L2_Complex", "gesture": "tripod"}]"#;
        assert!(load_suite(bad, builtin::script).is_err());
        let unknown = r#"[{"id": "x", "level": "L2_Complex", "script": "nope"}]"#;
        assert!(load_suite(unknown, builtin::script).is_err());
    }
}
