use std::fs;

use hsom::harness::{run_trial, ExperimentPlan, TrialSpec};
use hsom::persist::{load_snapshot, read_trace, save_snapshot, write_traces, FilterSnapshot};
use hsom::{builtin_world, FilterConfig, NoveltyFilter, WalkOptions, World};

fn plan(seed: u64) -> ExperimentPlan {
    let spec = |label: &str, world: &str, learning| TrialSpec {
        label: label.into(),
        world: world.into(),
        learning,
    };
    ExperimentPlan {
        trials: vec![
            spec("a1", "A", true),
            spec("a2", "A", true),
            spec("test-a", "A", false),
            spec("test-b", "B", false),
        ],
        filter: FilterConfig::default(),
        walk: WalkOptions {
            noise_amplitude: 0.05,
            noise_seed: seed,
            ..WalkOptions::default()
        },
        seed,
    }
}

fn worlds() -> Vec<World> {
    vec![builtin_world("A").unwrap(), builtin_world("B").unwrap()]
}

#[test]
fn identical_plans_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut written = Vec::new();
    for name in ["first", "second"] {
        let (traces, _) = plan(5).run(&worlds()).unwrap();
        let out = dir.path().join(name);
        written.push((out.clone(), write_traces(&traces, &out, 0.3).unwrap()));
    }
    assert_eq!(written[0].1, written[1].1);
    for entry in &written[0].1 {
        let a = fs::read(written[0].0.join(&entry.file)).unwrap();
        let b = fs::read(written[1].0.join(&entry.file)).unwrap();
        assert_eq!(a, b, "{}", entry.file);
    }
}

#[test]
fn different_seeds_diverge() {
    let (a, _) = plan(1).run(&worlds()).unwrap();
    let (b, _) = plan(2).run(&worlds()).unwrap();
    assert_ne!(a, b);
}

#[test]
fn snapshot_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let (_, snapshots) = plan(9).run(&worlds()).unwrap();
    for (i, filter) in snapshots.iter().enumerate() {
        let path = dir.path().join(format!("s{i}.json"));
        save_snapshot(filter, "x", &path).unwrap();
        let back = load_snapshot(&path).unwrap();
        assert_eq!(back.state_hash(), filter.state_hash());
        for (x, y) in back
            .grid()
            .all_weights()
            .iter()
            .zip(filter.grid().all_weights())
        {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in back.efficacies().iter().zip(filter.efficacies()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn restored_filter_continues_identically() {
    let a = builtin_world("A").unwrap();
    let walk = WalkOptions::default();
    let mut original = NoveltyFilter::new(FilterConfig::default(), 3).unwrap();
    run_trial(&mut original, &a, true, &walk, "warmup").unwrap();
    let mut restored =
        FilterSnapshot::from_json(&FilterSnapshot::capture(&original, "w").to_json())
            .unwrap()
            .restore()
            .unwrap();
    let x = run_trial(&mut original, &a, true, &walk, "next").unwrap();
    let y = run_trial(&mut restored, &a, true, &walk, "next").unwrap();
    assert_eq!(x, y);
    assert_eq!(original.state_hash(), restored.state_hash());
}

#[test]
fn trace_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (traces, _) = plan(4).run(&worlds()).unwrap();
    let entries = write_traces(&traces, dir.path(), 0.3).unwrap();
    for (entry, trace) in entries.iter().zip(&traces) {
        let back = read_trace(&dir.path().join(&entry.file)).unwrap();
        assert_eq!(back.label, trace.label);
        assert_eq!(back.len(), trace.len());
        for (r, s) in back.records.iter().zip(&trace.records) {
            assert_eq!(r.winner, s.winner);
            assert_eq!(r.novelty.to_bits(), s.novelty.to_bits());
        }
    }
}

#[test]
fn truncated_snapshot_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let filter = NoveltyFilter::new(FilterConfig::default(), 1).unwrap();
    let path = dir.path().join("f.json");
    save_snapshot(&filter, "x", &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, &text[..text.len() / 2]).unwrap();
    assert!(load_snapshot(&path).is_err());
}
