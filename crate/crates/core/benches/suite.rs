use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use handkin::choreography::validate_trajectory_with;
use handkin::{builtin, compile_script, run_suite, Bench, ExecMode, KeyFrame, ManipulationScript};

const MODES: [(&str, ExecMode); 2] = [
    ("sequential", ExecMode::Sequential),
    ("parallel", ExecMode::Parallel),
];

fn suite(c: &mut Criterion) {
    let spec = builtin::hand_spec();
    let set = builtin::gesture_set();
    let coupling = builtin::coupling();
    let tasks = builtin::suite();

    let mut group = c.benchmark_group("run_suite");
    for (name, mode) in MODES {
        let bench = Bench::new(&spec, &set, &coupling).with_mode(mode);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_suite(&tasks, &bench))
        });
    }
    group.finish();
}

fn long_trajectory(c: &mut Criterion) {
    let spec = builtin::hand_spec();
    let set = builtin::gesture_set();
    let coupling = builtin::coupling();
    // Visit every gesture once, slowly: a few thousand frames.
    let key_frames = set
        .records()
        .iter()
        .map(|g| KeyFrame::gesture(g.id.clone(), 60))
        .collect();
    let script = ManipulationScript::new("tour", 30.0, key_frames).unwrap();
    let trajectory = compile_script(&script, &set).unwrap();

    let mut group = c.benchmark_group("validate_trajectory");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| validate_trajectory_with(&trajectory, &spec, &coupling, 5.0, mode))
        });
    }
    group.finish();
}

criterion_group!(benches, suite, long_trajectory);
criterion_main!(benches);
