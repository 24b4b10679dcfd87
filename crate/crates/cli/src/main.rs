mod analyze;
mod data;

use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use handkin::actuation::export_actuator_csv;
use handkin::benchmark::{run_level1, Report};
use handkin::choreography::{
    export_trajectory_csv, trajectory_metrics, validate_trajectory, DEFAULT_MAX_STEP_DEG,
};
use handkin::gestures::{check_executable, RESIDUAL_TOLERANCE_DEG};
use handkin::hand::AbsentPolicy;
use handkin::{compile_script, run_suite, Bench, BenchmarkLevel, Digit, ExecMode, LoadMode};
use serde_json::json;

use crate::analyze::pretty;
use crate::data::{DataSource, DEFAULT};

#[derive(Parser)]
#[command(
    name = "handkin",
    version,
    about = "Kinematic simulator and choreography engine for a 13-actuator hand"
)]
struct Cli {
    /// Directory holding hand_spec.json, gestures.json, scripts/ and suite.json.
    #[arg(long, global = true, env = "HANDKIN_DATA_DIR")]
    data_dir: Option<PathBuf>,

    /// Hand spec document, or `default`.
    #[arg(long, global = true, default_value = DEFAULT)]
    hand_spec: String,

    /// Gesture set document, or `default`.
    #[arg(long, global = true, default_value = DEFAULT)]
    gestures: String,

    /// Keep gestures that leave the actuated envelope, reporting them as warnings.
    #[arg(long, global = true)]
    lenient: bool,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the main output here instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Absent {
    Exclude,
    Include,
}

#[derive(Subcommand)]
enum Command {
    /// Check the gesture set, or a script, against the hand.
    Validate {
        /// Validate this script instead of the gesture set.
        #[arg(long)]
        script: Option<String>,
    },
    /// Coverage, fingertip-trajectory and tendon analyses.
    Analyze {
        #[command(subcommand)]
        analysis: Analysis,
    },
    /// Compile a script into a frame-by-frame trajectory.
    Compile {
        script: String,
        /// Also write the per-frame actuator CSV here.
        #[arg(long)]
        actuators: Option<PathBuf>,
    },
    /// Run benchmark tasks.
    Bench {
        /// Run only this level.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        level: Option<u8>,
        /// Suite document, or `all` for the shipped suite.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Evaluate tasks one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Write loaded data back out in canonical form.
    Export {
        #[arg(value_enum)]
        what: ExportKind,
        /// Script name or path, for `export script`.
        name: Option<String>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

#[derive(Subcommand)]
enum Analysis {
    /// Share of the human and grasping ranges the hand reaches.
    Coverage {
        #[arg(long, value_enum, default_value = "exclude")]
        absent: Absent,
    },
    /// Fingertip path during a full flexion sweep, with a log-spiral fit.
    Trajectory {
        #[arg(long, default_value = "index")]
        digit: Digit,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Linear fits of joint angle against tendon excursion.
    Tendon {
        /// CSV with columns joint, excursion_mm, angle_deg.
        #[arg(long)]
        data: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportKind {
    HandSpec,
    Gestures,
    Script,
}

/// Main output plus the process exit status.
struct Outcome {
    text: String,
    ok: bool,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn require_format(format: Option<Format>, default: Format, allowed: &[Format]) -> Result<Format> {
    let f = format.unwrap_or(default);
    if !allowed.contains(&f) {
        bail!("format {f:?} is not supported by this command");
    }
    Ok(f)
}

fn run(cli: Cli) -> Result<Outcome> {
    let source = DataSource {
        dir: cli.data_dir.clone(),
    };
    let mode = if cli.lenient {
        LoadMode::Lenient
    } else {
        LoadMode::Strict
    };
    let all = [Format::Json, Format::Csv, Format::Text];
    match cli.command {
        Command::Validate { script: None } => {
            let format = require_format(cli.format, Format::Text, &[Format::Json, Format::Text])?;
            let loaded = source.hand_spec(&cli.hand_spec)?;
            let text = source.gesture_text(&cli.gestures)?;
            // Load leniently so every problem is listed, then apply strictness.
            let (set, _) = handkin::GestureSet::load(&text, &loaded.spec, LoadMode::Lenient)
                .context("invalid gesture set")?;
            let mut problems = Vec::new();
            let mut off_manifold = false;
            let mut out_of_range = false;
            for g in set.records() {
                let check = check_executable(&g.pose, &loaded.spec, &loaded.coupling);
                let mut lines: Vec<String> =
                    check.violations.iter().map(ToString::to_string).collect();
                out_of_range |= !check.violations.is_empty();
                if check.residual > RESIDUAL_TOLERANCE_DEG {
                    off_manifold = true;
                    lines.push(format!(
                        "coupling residual {:.3}° > {RESIDUAL_TOLERANCE_DEG}°",
                        check.residual
                    ));
                }
                if !lines.is_empty() {
                    problems.push((g.id.clone(), lines));
                }
            }
            let ok = !off_manifold && (!out_of_range || mode == LoadMode::Lenient);
            let text = match format {
                Format::Json => pretty(&json!({
                    "gestures": set.len(),
                    "ok": ok,
                    "problems": problems.iter().map(|(id, l)| json!({"id": id, "problems": l})).collect::<Vec<_>>(),
                })),
                _ => {
                    let mut out = String::new();
                    for (id, lines) in &problems {
                        for l in lines {
                            let _ = writeln!(out, "{id}: {l}");
                        }
                    }
                    if problems.is_empty() {
                        let _ = writeln!(out, "{} gestures OK", set.len());
                    } else {
                        let _ = writeln!(
                            out,
                            "{} of {} gestures have problems",
                            problems.len(),
                            set.len()
                        );
                    }
                    out
                }
            };
            Ok(Outcome { text, ok })
        }
        Command::Validate { script: Some(path) } => {
            let format = require_format(cli.format, Format::Text, &[Format::Json, Format::Text])?;
            let loaded = source.hand_spec(&cli.hand_spec)?;
            let (set, _) = source.gestures(&cli.gestures, &loaded.spec, mode)?;
            let script = source.script(&path)?;
            let trajectory = match compile_script(&script, &set) {
                Ok(t) => t,
                Err(e) => {
                    return Ok(Outcome {
                        text: format!("{}: compile error: {e}\n", script.name),
                        ok: false,
                    })
                }
            };
            let report = validate_trajectory(
                &trajectory,
                &loaded.spec,
                &loaded.coupling,
                DEFAULT_MAX_STEP_DEG,
            );
            let ok = report.is_clean(RESIDUAL_TOLERANCE_DEG);
            let text = match format {
                Format::Json => {
                    pretty(&json!({ "script": script.name, "ok": ok, "report": report }))
                }
                _ => {
                    let mut out = String::new();
                    for fv in &report.rom_violations {
                        for v in &fv.violations {
                            let _ = writeln!(out, "frame {}: {v}", fv.frame);
                        }
                    }
                    if report.max_residual > RESIDUAL_TOLERANCE_DEG {
                        let _ = writeln!(out, "max coupling residual {:.3}°", report.max_residual);
                    }
                    for s in &report.segments_over_limit {
                        let _ = writeln!(
                            out,
                            "segment to key frame {}: {:.3}°/frame, use at least {} frames",
                            s.key_frame, s.step_deg, s.suggested_interval
                        );
                    }
                    let _ = writeln!(
                        out,
                        "{}: {} frames, max step {:.3}°/frame, {}",
                        script.name,
                        trajectory.frames().len(),
                        report.max_step_deg,
                        if ok { "OK" } else { "FAILED" }
                    );
                    out
                }
            };
            Ok(Outcome { text, ok })
        }
        Command::Analyze { analysis } => {
            let text = match analysis {
                Analysis::Coverage { absent } => {
                    let loaded = source.hand_spec(&cli.hand_spec)?;
                    let policy = match absent {
                        Absent::Exclude => AbsentPolicy::ExcludeAbsent,
                        Absent::Include => AbsentPolicy::IncludeAbsentAsZero,
                    };
                    analyze::coverage(&loaded, policy, cli.format.unwrap_or(Format::Text))?
                }
                Analysis::Trajectory { digit, samples } => {
                    let loaded = source.hand_spec(&cli.hand_spec)?;
                    let (body, side) = analyze::trajectory(
                        &loaded,
                        digit,
                        samples,
                        cli.format.unwrap_or(Format::Csv),
                    )?;
                    eprint!("{side}");
                    body
                }
                Analysis::Tendon { data } => {
                    analyze::tendon(&data, require_format(cli.format, Format::Text, &all)?)?
                }
            };
            Ok(Outcome { text, ok: true })
        }
        Command::Compile { script, actuators } => {
            let format = require_format(cli.format, Format::Csv, &[Format::Csv, Format::Json])?;
            let loaded = source.hand_spec(&cli.hand_spec)?;
            let (set, _) = source.gestures(&cli.gestures, &loaded.spec, mode)?;
            let script = source.script(&script)?;
            let trajectory = compile_script(&script, &set)?;
            let report = validate_trajectory(
                &trajectory,
                &loaded.spec,
                &loaded.coupling,
                DEFAULT_MAX_STEP_DEG,
            );
            if let Some(path) = actuators {
                emit(
                    Some(&path),
                    &export_actuator_csv(&trajectory, &loaded.coupling),
                )?;
            }
            let ok = report.is_clean(RESIDUAL_TOLERANCE_DEG);
            if !ok {
                eprintln!(
                    "{}: trajectory is not clean ({} frame(s) out of range, max residual {:.3}°, max step {:.3}°/frame)",
                    script.name,
                    report.rom_violations.len(),
                    report.max_residual,
                    report.max_step_deg
                );
            }
            let text = match format {
                Format::Json => pretty(&json!({
                    "trajectory": trajectory,
                    "metrics": trajectory_metrics(&trajectory),
                    "validation": report,
                })),
                _ => export_trajectory_csv(&trajectory),
            };
            Ok(Outcome { text, ok })
        }
        Command::Bench {
            level,
            suite,
            sequential,
        } => {
            let format = require_format(cli.format, Format::Text, &[Format::Json, Format::Text])?;
            let loaded = source.hand_spec(&cli.hand_spec)?;
            let (set, _) = source.gestures(&cli.gestures, &loaded.spec, mode)?;
            let exec = if sequential {
                ExecMode::Sequential
            } else {
                ExecMode::default()
            };
            let bench = Bench::new(&loaded.spec, &set, &loaded.coupling).with_mode(exec);
            let report = match level {
                Some(1) => Report::from_results(run_level1(&bench)?),
                Some(n) => {
                    let wanted = BenchmarkLevel::ALL[usize::from(n) - 1];
                    let tasks: Vec<_> = source
                        .suite(&suite)?
                        .into_iter()
                        .filter(|t| t.level == wanted)
                        .collect();
                    run_suite(&tasks, &bench)
                }
                None => run_suite(&source.suite(&suite)?, &bench),
            };
            let text = match format {
                Format::Json => report.to_json(),
                _ => report.render_text(),
            };
            Ok(Outcome {
                ok: report.all_passed(),
                text,
            })
        }
        Command::Export { what, name } => {
            let text = match what {
                ExportKind::HandSpec => source.hand_spec(&cli.hand_spec)?.spec.to_json(),
                ExportKind::Gestures => {
                    let loaded = source.hand_spec(&cli.hand_spec)?;
                    source
                        .gestures(&cli.gestures, &loaded.spec, mode)?
                        .0
                        .to_json()
                }
                ExportKind::Script => {
                    let name = name.context("export script needs a script name or path")?;
                    source.script(&name)?.to_json()
                }
            };
            Ok(Outcome { text, ok: true })
        }
        Command::Serve { port, host } => {
            let loaded = source.hand_spec(&cli.hand_spec)?;
            let (set, _) = source.gestures(&cli.gestures, &loaded.spec, mode)?;
            let state = handkin_server::AppState::new(loaded.spec_text, set)?;
            let addr = SocketAddr::new(host, port);
            eprintln!("listening on http://{addr}");
            tokio::runtime::Runtime::new()?.block_on(handkin_server::serve(state, addr))?;
            Ok(Outcome {
                text: String::new(),
                ok: true,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match run(cli).and_then(|o| emit(out.as_deref(), &o.text).map(|_| o.ok)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
