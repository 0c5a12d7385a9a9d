use criterion::{criterion_group, criterion_main, Criterion};

use bioprep_bench::soundscape_hour;
use bioprep_core::audiodsp::{window_manifest, DEFAULT_HOP_S, DEFAULT_MIN_COUNT, DEFAULT_WIN_S};
use bioprep_core::promptgen::{generate, GenConfig};
use bioprep_core::{synth, Task, TemplateRegistry};

fn pipeline(c: &mut Criterion) {
    let (table, clips, windows) = soundscape_hour();
    let registry = TemplateRegistry::builtin();
    let cfg = GenConfig::default();
    let mut group = c.benchmark_group("one hour of soundscapes");
    group.sample_size(20);
    group.bench_function("window", |b| {
        b.iter(|| window_manifest(&clips, DEFAULT_WIN_S, DEFAULT_HOP_S, DEFAULT_MIN_COUNT, 0.0).unwrap())
    });
    group.bench_function("generate detection over 720 windows", |b| {
        b.iter(|| generate(&clips, &windows, &table, &cfg, &registry, &[Task::Detection]).unwrap())
    });
    group.finish();

    let focal = synth::focal_clips(&table, 1000, 7);
    let mut group = c.benchmark_group("focal clips");
    group.sample_size(20);
    group.bench_function("generate all tasks over 1000 clips", |b| {
        b.iter(|| generate(&focal, &[], &table, &cfg, &registry, &Task::ALL).unwrap())
    });
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
