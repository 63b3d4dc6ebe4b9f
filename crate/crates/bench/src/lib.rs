//! Fixtures for the pipeline benchmarks.

use motion_insight_core::synthgen::{composite_day, generate, Scenario, ScenarioSpec};
use motion_insight_core::{Analysis, Capture, Config};

/// A clean walking capture of the given length at 30 fps, 22 joints.
pub fn walking_capture(minutes: f64, seed: u64) -> Capture {
    let spec = ScenarioSpec::new(Scenario::CleanWalk, seed).with_duration(minutes * 60.0);
    generate(&spec)
        .expect("valid spec")
        .segments
        .into_iter()
        .next()
        .expect("one segment")
        .capture
}

/// The four-segment composite day, fully analyzed.
pub fn composite_analysis(seed: u64) -> Analysis {
    Analysis::new(composite_day(seed).to_dataset(), Config::default())
}
