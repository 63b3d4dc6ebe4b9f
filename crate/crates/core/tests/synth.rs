use motion_insight_core::aggregate::{distribution, global_stats};
use motion_insight_core::events::{apply_filters, FilterSpec};
use motion_insight_core::model::{load_dataset, serialize_capture, serialize_labels, Action, ParseMode};
use motion_insight_core::synthgen::{
    composite_day, generate, DeficitKind, DeficitParams, Scenario, ScenarioSpec, SyntheticDataset,
};
use motion_insight_core::{Analysis, Config, EventId, Variable};

fn analyze(g: &SyntheticDataset) -> Analysis {
    Analysis::new(g.to_dataset(), Config::default())
}

fn bytes(g: &SyntheticDataset) -> Vec<Vec<u8>> {
    g.segments
        .iter()
        .flat_map(|s| [serialize_capture(&s.capture), serialize_labels(&s.labels)])
        .chain([serde_json::to_vec(&g.truth).unwrap()])
        .collect()
}

fn overlap(a: (usize, usize), b: (usize, usize)) -> f64 {
    let inter = a.1.min(b.1).saturating_sub(a.0.max(b.0));
    inter as f64 / (b.1 - b.0) as f64
}

#[test]
fn same_seed_same_bytes() {
    for scenario in Scenario::ALL {
        if scenario == Scenario::CompositeDay {
            continue;
        }
        let spec = ScenarioSpec::new(scenario, 42).with_duration(30.0);
        assert_eq!(bytes(&generate(&spec).unwrap()), bytes(&generate(&spec).unwrap()), "{scenario}");
    }
    let other = ScenarioSpec::new(Scenario::CleanWalk, 43).with_duration(30.0);
    let base = ScenarioSpec::new(Scenario::CleanWalk, 42).with_duration(30.0);
    assert_ne!(bytes(&generate(&other).unwrap()), bytes(&generate(&base).unwrap()));
}

#[test]
fn clean_walk_has_no_freezes() {
    for seed in 0..5 {
        let g = generate(&ScenarioSpec::new(Scenario::CleanWalk, seed)).unwrap();
        assert!(analyze(&g).all_freezes().is_empty(), "seed {seed}");
    }
}

#[test]
fn injected_freezes_are_found() {
    for (seed, count, dur) in [(1, 1, 1.5), (2, 2, 2.0), (3, 3, 4.0), (4, 1, 1.1)] {
        let spec = ScenarioSpec::new(Scenario::FreezeWalk, seed).with_params(DeficitParams {
            freeze_count: count,
            freeze_duration_s: dur,
            ..DeficitParams::default()
        });
        let g = generate(&spec).unwrap();
        let a = analyze(&g);
        let found = a.all_freezes();
        let truth: Vec<_> = g.truth.of_kind(DeficitKind::Freeze).collect();
        assert_eq!(found.len(), truth.len(), "seed {seed}");
        for (f, t) in found.iter().zip(truth) {
            assert!(overlap((f.start_frame, f.end_frame), (t.start_frame, t.end_frame)) >= 0.8);
        }
    }
}

#[test]
fn output_passes_strict_validation() {
    let g = generate(&ScenarioSpec::new(Scenario::FallStand, 9)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = g.write(dir.path()).unwrap();
    let loaded = load_dataset(&manifest, ParseMode::Strict).unwrap();
    let mem = g.to_dataset();
    assert_eq!(loaded.segments().len(), mem.segments().len());
    for (a, b) in loaded.segments().iter().zip(mem.segments()) {
        assert_eq!(a.capture, b.capture);
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.wall_clock_start, b.wall_clock_start);
    }
    assert!(dir.path().join("truth.json").exists());
}

#[test]
fn weight_bias_shows_in_the_distribution() {
    let g = generate(&ScenarioSpec::new(Scenario::WeightBiasWalk, 6)).unwrap();
    let a = analyze(&g);
    let d = distribution(Variable::WeightL, a.series()[0].values(Variable::WeightL).iter().copied()).unwrap();
    let (lo, hi) = d.bin_range(d.mode_bin());
    assert!((lo + hi) / 2.0 > 0.55, "mode at {lo}..{hi}");
}

#[test]
fn composite_day_shape_and_freezes() {
    let g = composite_day(2024);
    assert_eq!(g.segments.len(), 4);
    let a = analyze(&g);
    let stats = global_stats(a.dataset(), a.events());
    for t in &stats.actions {
        assert!(t.event_count > 0, "{} missing", t.action);
    }
    assert!((0.25..=0.5).contains(&stats.percent_sitting), "{}", stats.percent_sitting);
    let minutes = stats.total_duration_s / 60.0;
    assert!((40.0..60.0).contains(&minutes), "{minutes}");

    let walking = a.events().only_action(Action::Walking);
    let hits = apply_filters(&walking, &a.filter_context(), &[FilterSpec::PotentialFreezes]);
    let mut expected: Vec<EventId> = g
        .truth
        .of_kind(DeficitKind::Freeze)
        .map(|t| {
            walking
                .iter()
                .find(|e| e.segment == t.segment && e.start_frame <= t.start_frame && t.end_frame <= e.end_frame)
                .expect("freeze inside a walk")
                .id
        })
        .collect();
    expected.sort();
    assert_eq!(hits.ids(), expected);
}

#[test]
fn composite_day_is_deterministic() {
    assert_eq!(bytes(&composite_day(7)), bytes(&composite_day(7)));
}
