use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use molgen_core::generate::{generate_with, RunOptions};
use molgen_core::par::Execution;
use molgen_core::spec::RequirementSpec;

const CASE_STUDY: &str = r#"{
    "atoms": ["C", "N", "O", "S"],
    "n_atoms": 20,
    "bounds": {
        "atoms": {"lb": [10, null, null, null], "ub": [null, 5, 5, 5]},
        "double_bonds": {"lb": null, "ub": 10},
        "triple_bonds": {"lb": null, "ub": 10},
        "rings": {"lb": null, "ub": 0}
    },
    "exclude": ["[CH0]", "[N,O,S]~[N,O,S]", "[N,O,S]~C~[N,O,S]"],
    "options": {"batch_size": 50, "base_seed": 1}
}"#;

const SMALL: &str = r#"{
    "atoms": ["C", "N", "O"],
    "n_atoms": 10,
    "bounds": {"rings": {"lb": null, "ub": 1}},
    "exclude": ["N~N", "O~O", "[OH1]~C=O"],
    "options": {"batch_size": 25}
}"#;

fn executions() -> [(&'static str, Execution); 2] {
    [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ]
}

fn bench_generation(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate");
    group
        .sample_size(10)
        .measurement_time(Duration::from_secs(20));
    for (label, json, num) in [
        ("small_n10", SMALL, 200),
        ("case_study_n20", CASE_STUDY, 400),
    ] {
        let spec = RequirementSpec::from_json(json).unwrap();
        for (name, execution) in executions() {
            group.bench_with_input(BenchmarkId::new(label, name), &spec, |b, spec| {
                b.iter(|| {
                    let g = generate_with(black_box(spec), num, RunOptions { execution }).unwrap();
                    black_box(g.report.unique)
                })
            });
        }
    }
    group.finish();
}

fn bench_compile(c: &mut Criterion) {
    let spec = RequirementSpec::from_json(CASE_STUDY).unwrap();
    c.bench_function("compile_case_study", |b| {
        b.iter(|| black_box(spec.compile().unwrap().model.model.n_constraints()))
    });
}

criterion_group!(benches, bench_generation, bench_compile);
criterion_main!(benches);
