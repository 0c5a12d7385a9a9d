use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bioprep_core::audiodsp::bundle::{write_bundle, AUDIOSET_CLASSES};
use bioprep_core::audiodsp::Waveform;
use bioprep_core::{ClipRecord, Event};
use ndarray::Array2;
use serde_json::Value;

fn bioprep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bioprep")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = bioprep(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, clips: usize) -> (PathBuf, PathBuf, PathBuf) {
    ok(&["synth", "--out", s(dir), "--clips", &clips.to_string(), "--soundscapes", "4", "--seed", "3"]);
    (dir.join("taxonomy.csv"), dir.join("clips.jsonl"), dir.join("soundscapes.jsonl"))
}

fn jsonl(path: &Path) -> Vec<Value> {
    fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn every_flag_documents_a_default() {
    let top = String::from_utf8(ok(&["--help"]).stdout).unwrap();
    let subs: Vec<&str> = top
        .lines()
        .skip_while(|l| !l.starts_with("Commands:"))
        .skip(1)
        .take_while(|l| !l.is_empty())
        .filter_map(|l| l.split_whitespace().next())
        .filter(|c| *c != "help")
        .collect();
    assert_eq!(subs.len(), 8, "{top}");
    for sub in subs {
        let help = String::from_utf8(ok(&[sub, "--help"]).stdout).unwrap();
        let usage = help.lines().find(|l| l.starts_with("Usage:")).unwrap().to_string();
        // long help wraps descriptions onto the next line
        let lines: Vec<&str> = help.lines().collect();
        for (i, l) in lines.iter().enumerate() {
            let t = l.trim_start();
            if !t.starts_with("--") || t.starts_with("--help") || t.starts_with("--version") {
                continue;
            }
            let flag = t.split([' ', '<']).next().unwrap();
            let required = usage.contains(&format!("{flag} <"));
            let text = format!("{l} {}", lines.get(i + 1).copied().unwrap_or(""));
            assert!(required || text.contains("[default:"), "{sub} {flag} lacks a default:\n{help}");
        }
    }
}

#[test]
fn validate_lists_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let (tax, clips, _) = synth(dir.path(), 20);
    ok(&["validate", "--manifest", s(&clips), "--taxonomy", s(&tax)]);

    let bad = dir.path().join("bad.jsonl");
    let mut text = fs::read_to_string(&clips).unwrap();
    text.push_str("{not json\n");
    let mut broken = ClipRecord::new("x1", "d", 10.0);
    broken.focal_taxon = Some("t99999".into());
    broken.events.push(Event::new(8.0, 12.0, "t00001"));
    text.push_str(&serde_json::to_string(&broken).unwrap());
    text.push('\n');
    fs::write(&bad, text).unwrap();
    let out = bioprep(&["validate", "--manifest", s(&bad), "--taxonomy", s(&tax)]);
    assert_eq!(out.status.code(), Some(1));
    let problems: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(problems.iter().any(|p| p["kind"] == "parse" && p["line"] == 21), "{problems:?}");
    assert!(problems.iter().filter(|p| p["id"] == "x1").count() >= 2, "{problems:?}");
}

#[test]
fn strict_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let (tax, _, _) = synth(dir.path(), 1);
    let m = dir.path().join("extra.jsonl");
    let mut clip = serde_json::to_value(ClipRecord::new("a", "d", 3.0)).unwrap();
    clip["focal_taxon"] = "t00001".into();
    clip["source_url"] = "https://example.org/a".into();
    fs::write(&m, format!("{clip}\n")).unwrap();
    ok(&["validate", "--manifest", s(&m), "--taxonomy", s(&tax)]);
    let out = bioprep(&["validate", "--manifest", s(&m), "--taxonomy", s(&tax), "--strict"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("unknown_key"));
}

#[test]
fn generate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (tax, clips, _) = synth(dir.path(), 200);
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        ok(&["generate", "--manifest", s(&clips), "--taxonomy", s(&tax), "--out", s(&out), "--seed", seed]);
        fs::read(out).unwrap()
    };
    let a = run("a.jsonl", "7");
    assert_eq!(a, run("b.jsonl", "7"));
    assert_ne!(a, run("c.jsonl", "8"));
}

#[test]
fn stage_one_is_classification_only() {
    let dir = tempfile::tempdir().unwrap();
    let (tax, clips, _) = synth(dir.path(), 50);
    let out = dir.path().join("s1.jsonl");
    ok(&["generate", "--manifest", s(&clips), "--taxonomy", s(&tax), "--out", s(&out), "--stage", "stage1"]);
    let inst = jsonl(&out);
    assert!(!inst.is_empty());
    assert!(inst.iter().all(|i| i["task"] == "classification" && i["stage"] == "stage1"));
}

#[test]
fn window_defaults_give_twelve_windows_per_minute() {
    let dir = tempfile::tempdir().unwrap();
    let (_, _, scapes) = synth(dir.path(), 1);
    let out = dir.path().join("w.jsonl");
    ok(&["window", "--manifest", s(&scapes), "--out", s(&out)]);
    let rows = jsonl(&out);
    assert_eq!(rows.len(), 4 * 12);
    let starts: Vec<f64> = rows.iter().take(12).map(|r| r["start_s"].as_f64().unwrap()).collect();
    assert_eq!(starts, (0..12).map(|k| 5.0 * k as f64).collect::<Vec<_>>());
    // 30 events over 12 species never clear 100, so every label is "other"
    assert!(rows.iter().flat_map(|r| r["labels"].as_array().unwrap()).all(|l| l == "other"));
}

#[test]
fn oracle_predictions_score_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let (tax, clips, scapes) = synth(dir.path(), 100);
    let w = dir.path().join("w.jsonl");
    ok(&["window", "--manifest", s(&scapes), "--out", s(&w), "--min-count", "5"]);
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    ok(&["generate", "--manifest", s(&clips), "--taxonomy", s(&tax), "--out", s(&a)]);
    ok(&["generate", "--manifest", s(&scapes), "--windows", s(&w), "--taxonomy", s(&tax), "--out", s(&b), "--tasks", "detection"]);
    let mut refs = jsonl(&a);
    refs.extend(jsonl(&b));
    let inst = dir.path().join("inst.jsonl");
    let preds = dir.path().join("pred.jsonl");
    let lines = |f: &dyn Fn(&Value) -> Value| refs.iter().map(|v| f(v).to_string() + "\n").collect::<String>();
    fs::write(&inst, lines(&|v| v.clone())).unwrap();
    fs::write(&preds, lines(&|v| serde_json::json!({"instance_id": v["instance_id"], "text": v["target"]}))).unwrap();

    let report = dir.path().join("report.json");
    let stdout = ok(&["evaluate", "--instances", s(&inst), "--predictions", s(&preds), "--out", s(&report)]).stdout;
    assert!(String::from_utf8(stdout).unwrap().contains("detection\tmacro_f1\t1.000000"));
    let reports: Vec<Value> = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    for r in &reports {
        let want = if r["task"] == "captioning" { 10.0 } else { 1.0 };
        assert!((r["primary_score"].as_f64().unwrap() - want).abs() < 1e-6, "{r}");
    }

    // one missing prediction is a metric error
    let partial = dir.path().join("partial.jsonl");
    let text = fs::read_to_string(&preds).unwrap();
    fs::write(&partial, text.lines().skip(1).map(|l| format!("{l}\n")).collect::<String>()).unwrap();
    let out = bioprep(&["evaluate", "--instances", s(&inst), "--predictions", s(&partial), "--out", s(&report)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn holdout_partitions_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (tax, clips, _) = synth(dir.path(), 400);
    let out = dir.path().join("split");
    ok(&["holdout", "--manifest", s(&clips), "--taxonomy", s(&tax), "--out", s(&out), "--n-species", "10", "--min-genus-recordings", "4"]);
    let train = jsonl(&out.join("train.jsonl"));
    let hold = jsonl(&out.join("holdout.jsonl"));
    assert_eq!(train.len() + hold.len(), 400);
    let species: Value = serde_json::from_str(&fs::read_to_string(out.join("species.json")).unwrap()).unwrap();
    assert_eq!(species["sampling"], "uniform");
    let held: Vec<&str> = species["species"].as_array().unwrap().iter().map(|s| s["taxon_id"].as_str().unwrap()).collect();
    assert_eq!(held.len(), 10);
    let mentions = |c: &Value, id: &str| {
        c["focal_taxon"] == id || c["all_taxa"].as_array().is_some_and(|a| a.iter().any(|t| t == id))
    };
    assert!(train.iter().all(|c| held.iter().all(|id| !mentions(c, id))));
    assert!(hold.iter().all(|c| held.iter().any(|id| mentions(c, id))));
}

/// Broadband noise with a train of 120 ms upward sweeps every 200 ms
/// between `from` and `to` seconds.
fn call(sr: u32, seconds: f64, from: f64, to: f64) -> Waveform {
    let n = (sr as f64 * seconds) as usize;
    let mut state = 1u64;
    let samples = (0..n)
        .map(|i| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let noise = 0.01 * ((state >> 33) as f64 / (1u64 << 31) as f64 - 0.5);
            let t = i as f64 / sr as f64;
            let local = t - from - 0.2 * ((t - from) / 0.2).floor();
            let on = t >= from && t < to && local < 0.12;
            let f = 2000.0 + 15000.0 * local;
            (noise + if on { 0.3 * (2.0 * std::f64::consts::PI * f * local).sin() } else { 0.0 }) as f32
        })
        .collect();
    Waveform::new(sr, samples)
}

fn probs(p: f32) -> Array2<f32> {
    let mut a = Array2::zeros((10, AUDIOSET_CLASSES));
    a.column_mut(100).fill(p);
    a
}

#[test]
fn augment_mixes_animal_stems_and_gates() {
    let dir = tempfile::tempdir().unwrap();
    let bundles = dir.path().join("bundles");
    let sr = 16_000;
    write_bundle(
        bundles.join("b1"),
        &[
            (call(sr, 8.0, 5.0, 6.4), probs(0.9)),
            (call(sr, 8.0, 0.0, 0.0), probs(0.5)),
        ],
        0.8,
    )
    .unwrap();
    write_bundle(bundles.join("b2"), &[(call(sr, 8.0, 5.0, 6.4), probs(0.2))], 0.8).unwrap();

    let out = dir.path().join("aug.jsonl");
    let audio = dir.path().join("audio");
    let run = ok(&["augment", "--bundles", s(&bundles), "--out", s(&out), "--audio-out", s(&audio)]);
    assert!(String::from_utf8_lossy(&run.stderr).contains("skipped b2"));
    let rows = jsonl(&out);
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row["clip_id"], "b1");
    let selected: Vec<bool> = row["stems"].as_array().unwrap().iter().map(|s| s["selected"].as_bool().unwrap()).collect();
    assert_eq!(selected, [true, false]);
    let segs = row["segments"].as_array().unwrap();
    assert_eq!(segs.len(), 1, "{segs:?}");
    let (a, b) = (segs[0][0].as_f64().unwrap(), segs[0][1].as_f64().unwrap());
    assert!((4.8..=5.2).contains(&a) && (5.8..=6.6).contains(&b), "{segs:?}");
    assert!(audio.join("b1.wav").exists());
}

#[test]
fn usage_and_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let (tax, clips, _) = synth(dir.path(), 5);
    let out = dir.path().join("x.jsonl");
    let base = ["generate", "--manifest", s(&clips), "--taxonomy", s(&tax), "--out", s(&out)];
    let code = |extra: &[&str]| bioprep(&[&base[..], extra].concat()).status.code();
    assert_eq!(code(&["--tasks", "birdsong"]), Some(2));
    assert_eq!(code(&["--stage", "stage3"]), Some(2));
    assert_eq!(code(&["--none-rate", "1.5"]), Some(2));
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[window]\nwin = 3\n").unwrap();
    assert_eq!(code(&["--config", s(&cfg)]), Some(2));
    assert_eq!(code(&["--config", s(&dir.path().join("missing.toml"))]), Some(2));
    assert_eq!(bioprep(&["generate", "--manifest", "/nonexistent", "--taxonomy", s(&tax), "--out", s(&out)]).status.code(), Some(1));
}
