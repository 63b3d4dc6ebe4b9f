//! Deterministic synthetic activity recordings with injectable motor
//! deficits and a ground-truth manifest.
//!
//! The gait model is parametric and sinusoidal: contralateral arm swing and
//! sagittal foot oscillation while walking, a ~5° trunk baseline, and
//! deficits injected as parameter overrides. Output is byte-identical for a
//! fixed spec and seed.

mod body;
mod sim;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Duration, FixedOffset};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    serialize_capture, serialize_labels, serialize_manifest, ActionLabel, Capture,
    SegmentManifest, SegmentRef,
};

pub use body::{Pose, JOINTS};
use sim::{Block, BlockKind, OverlayKind, Simulator};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("invalid scenario spec: {0}")]
    Invalid(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    CleanWalk,
    FreezeWalk,
    FallStand,
    ImbalancedArmWalk,
    WeightBiasWalk,
    SlowSitToStand,
    CompositeDay,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::CleanWalk,
        Scenario::FreezeWalk,
        Scenario::FallStand,
        Scenario::ImbalancedArmWalk,
        Scenario::WeightBiasWalk,
        Scenario::SlowSitToStand,
        Scenario::CompositeDay,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::CleanWalk => "clean_walk",
            Scenario::FreezeWalk => "freeze_walk",
            Scenario::FallStand => "fall_stand",
            Scenario::ImbalancedArmWalk => "imbalanced_arm_walk",
            Scenario::WeightBiasWalk => "weight_bias_walk",
            Scenario::SlowSitToStand => "slow_sit_to_stand",
            Scenario::CompositeDay => "composite_day",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| SpecError::UnknownScenario(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeficitParams {
    pub freeze_count: usize,
    pub freeze_duration_s: f64,
    /// Healthy-to-weak arm swing amplitude ratio.
    pub arm_ratio: f64,
    /// Coronal pelvis shift toward the left foot, meters; negative shifts
    /// right. Must stay inside the 0.1 m stance half-width.
    pub weight_bias_m: f64,
    pub fall_trunk_deg: f64,
    pub slow_sit_to_stand_s: f64,
}

impl Default for DeficitParams {
    fn default() -> Self {
        Self {
            freeze_count: 1,
            freeze_duration_s: 1.5,
            arm_ratio: 3.0,
            weight_bias_m: 0.04,
            fall_trunk_deg: 70.0,
            slow_sit_to_stand_s: 12.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub duration_s: f64,
    pub fps: f64,
    pub seed: u64,
    pub params: DeficitParams,
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Self {
            scenario,
            duration_s: 60.0,
            fps: 30.0,
            seed,
            params: DeficitParams::default(),
        }
    }

    pub fn with_duration(mut self, duration_s: f64) -> Self {
        self.duration_s = duration_s;
        self
    }

    pub fn with_params(mut self, params: DeficitParams) -> Self {
        self.params = params;
        self
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let bad = |m: String| Err(SpecError::Invalid(m));
        let p = &self.params;
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return bad(format!("duration_s must be positive, got {}", self.duration_s));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return bad(format!("fps must be positive, got {}", self.fps));
        }
        if !(p.freeze_duration_s.is_finite() && p.freeze_duration_s > 0.0) {
            return bad("freeze_duration_s must be positive".into());
        }
        if !(p.arm_ratio.is_finite() && p.arm_ratio >= 1.0) {
            return bad("arm_ratio must be >= 1".into());
        }
        if !(p.weight_bias_m.is_finite() && p.weight_bias_m.abs() < 0.09) {
            return bad("weight_bias_m must lie in (-0.09, 0.09)".into());
        }
        if !(p.fall_trunk_deg > 0.0 && p.fall_trunk_deg <= 90.0) {
            return bad("fall_trunk_deg must lie in (0, 90]".into());
        }
        if !(p.slow_sit_to_stand_s.is_finite() && p.slow_sit_to_stand_s > 0.0) {
            return bad("slow_sit_to_stand_s must be positive".into());
        }
        let d = self.duration_s;
        match self.scenario {
            Scenario::FreezeWalk => {
                // Each freeze needs its own slot with a stride on both sides.
                let slot = d / (p.freeze_count as f64 + 1.0);
                if p.freeze_count == 0 || slot < p.freeze_duration_s + 2.0 {
                    return bad(format!(
                        "{} freezes of {} s do not fit in {d} s",
                        p.freeze_count, p.freeze_duration_s
                    ));
                }
            }
            Scenario::FallStand if d < 10.0 => return bad("fall_stand needs >= 10 s".into()),
            Scenario::SlowSitToStand if d < p.slow_sit_to_stand_s + 2.0 => {
                return bad("duration too short for the sit-to-stand".into())
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeficitKind {
    Freeze,
    Fall,
    ImbalancedArm,
    WeightBias,
    SlowSitToStand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitRecord {
    pub kind: DeficitKind,
    pub segment: usize,
    pub start_frame: usize,
    pub end_frame: usize,
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub segment: usize,
    #[serde(flatten)]
    pub label: ActionLabel,
}

/// Everything injected into a generated recording.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DeficitTruth {
    pub deficits: Vec<DeficitRecord>,
    pub schedule: Vec<ScheduleEntry>,
}

impl DeficitTruth {
    pub fn of_kind(&self, kind: DeficitKind) -> impl Iterator<Item = &DeficitRecord> + '_ {
        self.deficits.iter().filter(move |d| d.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSegment {
    pub capture: Capture,
    pub labels: Vec<ActionLabel>,
    pub wall_clock_start: DateTime<FixedOffset>,
}

/// A generated dataset ready to be written as manifest + files.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub dataset_id: String,
    pub segments: Vec<GeneratedSegment>,
    pub truth: DeficitTruth,
}

fn base_clock() -> DateTime<FixedOffset> {
    DateTime::parse_from_rfc3339("2024-03-14T09:00:00+00:00").unwrap()
}

fn simulate(
    fps: f64,
    seed: u64,
    segment: usize,
    blocks: &[Block],
    start: DateTime<FixedOffset>,
    truth: &mut DeficitTruth,
) -> GeneratedSegment {
    let out = Simulator::new(fps, seed, segment).run(blocks);
    let joints = JOINTS.iter().map(|s| s.to_string()).collect();
    let capture = Capture::new(fps, joints, out.positions, Some(start))
        .expect("generator emits the canonical joints");
    let labels = crate::model::merge_labels(out.labels);
    truth.deficits.extend(out.deficits);
    truth.schedule.extend(labels.iter().map(|l| ScheduleEntry {
        segment,
        label: *l,
    }));
    GeneratedSegment {
        capture,
        labels,
        wall_clock_start: start,
    }
}

fn walking(arm_scale: [f64; 2], len_s: f64) -> Block {
    Block::new(BlockKind::Walking { arm_scale }, len_s)
}

/// Generates a single-segment scenario. `composite_day` is multi-segment;
/// use [`composite_day`] for it.
pub fn generate(spec: &ScenarioSpec) -> Result<SyntheticDataset, SpecError> {
    spec.validate()?;
    let d = spec.duration_s;
    let p = &spec.params;
    let even = [1.0, 1.0];
    let blocks = match spec.scenario {
        Scenario::CompositeDay => return Ok(composite_day(spec.seed)),
        Scenario::CleanWalk => vec![walking(even, d)],
        Scenario::FreezeWalk => {
            let slot = d / (p.freeze_count as f64 + 1.0);
            let mut b = walking(even, d);
            for i in 1..=p.freeze_count {
                b = b.with(
                    OverlayKind::Freeze,
                    slot * i as f64 - p.freeze_duration_s / 2.0,
                    p.freeze_duration_s,
                );
            }
            vec![b]
        }
        Scenario::FallStand => {
            let len = (d / 2.0).min(7.0);
            vec![Block::new(BlockKind::Standing, d).with(
                OverlayKind::Fall {
                    trunk_deg: p.fall_trunk_deg,
                },
                d / 3.0,
                len,
            )]
        }
        Scenario::ImbalancedArmWalk => vec![walking([1.0 / p.arm_ratio, 1.0], d)],
        Scenario::WeightBiasWalk => vec![walking(even, d).biased(p.weight_bias_m)],
        Scenario::SlowSitToStand => {
            let rest = (d - p.slow_sit_to_stand_s) / 2.0;
            vec![
                Block::new(BlockKind::Sitting, rest),
                Block::new(BlockKind::SitToStand { attempts: 3 }, p.slow_sit_to_stand_s),
                Block::new(BlockKind::Standing, rest),
            ]
        }
    };
    let mut truth = DeficitTruth::default();
    let seg = simulate(spec.fps, spec.seed, 0, &blocks, base_clock(), &mut truth);
    Ok(SyntheticDataset {
        dataset_id: format!("{}_seed{}", spec.scenario, spec.seed),
        segments: vec![seg],
        truth,
    })
}

/// Per-segment deficit placement for the composite day.
#[derive(Default, Clone, Copy)]
struct DayPlan {
    freeze_walk: Option<(usize, f64)>,
    weak_arm: Option<(usize, usize)>,
    fall: bool,
    slow_sts: bool,
    medicine: bool,
}

fn day_segment(plan: DayPlan, rng_jitter: f64) -> Vec<Block> {
    let even = [1.0, 1.0];
    let weak = 1.0 / DeficitParams::default().arm_ratio;
    let walk = |idx: usize, len: f64| {
        let mut scale = even;
        if let Some((w, side)) = plan.weak_arm {
            if w == idx {
                scale[side] = weak;
            }
        }
        let mut b = walking(scale, len);
        if let Some((w, dur)) = plan.freeze_walk {
            if w == idx {
                b = b.with(OverlayKind::Freeze, len * 0.4, dur);
            }
        }
        b
    };
    let mut sit1 = Block::new(BlockKind::Sitting, 120.0 + rng_jitter);
    if plan.medicine {
        sit1 = sit1.with(OverlayKind::Medicine, 45.0, 15.0);
    }
    let mut stand1 = Block::new(BlockKind::Standing, 60.0).with(OverlayKind::Reach, 8.0, 5.0);
    if plan.fall {
        stand1 = stand1.with(OverlayKind::Fall { trunk_deg: 70.0 }, 25.0, 7.0);
    }
    let sts1 = if plan.slow_sts {
        Block::new(BlockKind::SitToStand { attempts: 3 }, 12.0)
    } else {
        Block::new(BlockKind::SitToStand { attempts: 1 }, 2.5)
    };
    vec![
        sit1,
        sts1,
        stand1,
        walk(0, 90.0),
        Block::new(BlockKind::Standing, 15.0),
        walk(1, 120.0),
        Block::new(BlockKind::StandToSit, 2.5),
        Block::new(BlockKind::Sitting, 100.0),
        Block::new(BlockKind::SitToStand { attempts: 1 }, 2.5),
        Block::new(BlockKind::Standing, 40.0),
        walk(2, 90.0),
        Block::new(BlockKind::Standing, 15.0),
        Block::new(BlockKind::StandToSit, 2.5),
        Block::new(BlockKind::Sitting, 90.0 - rng_jitter),
    ]
}

/// A ~50-minute, four-segment day covering all seven actions with three
/// freezes, one fall, two imbalanced-arm walks and one slow sit-to-stand.
pub fn composite_day(seed: u64) -> SyntheticDataset {
    let plans = [
        DayPlan {
            freeze_walk: Some((0, 1.5)),
            medicine: true,
            ..Default::default()
        },
        DayPlan {
            freeze_walk: Some((1, 2.5)),
            fall: true,
            ..Default::default()
        },
        DayPlan {
            weak_arm: Some((0, 0)),
            slow_sts: true,
            medicine: true,
            ..Default::default()
        },
        DayPlan {
            freeze_walk: Some((2, 4.0)),
            weak_arm: Some((1, 1)),
            ..Default::default()
        },
    ];
    let fps = 30.0;
    let mut truth = DeficitTruth::default();
    let mut segments = Vec::with_capacity(plans.len());
    let mut start = base_clock();
    for (i, plan) in plans.iter().enumerate() {
        // Seed-dependent shift of sitting time between the first and last
        // sitting blocks; segment length is unchanged.
        let jitter = ((seed.wrapping_mul(31).wrapping_add(i as u64 * 17)) % 21) as f64 - 10.0;
        let blocks = day_segment(*plan, jitter);
        let seg = simulate(fps, seed, i, &blocks, start, &mut truth);
        let len = Duration::milliseconds((seg.capture.duration_s() * 1000.0).round() as i64);
        start = start + len + Duration::minutes(30);
        segments.push(seg);
    }
    SyntheticDataset {
        dataset_id: format!("composite_day_seed{seed}"),
        segments,
        truth,
    }
}

impl SyntheticDataset {
    pub fn manifest(&self) -> SegmentManifest {
        SegmentManifest::new(
            self.dataset_id.clone(),
            self.segments
                .iter()
                .enumerate()
                .map(|(i, s)| SegmentRef {
                    capture: format!("segment_{i}_capture.json"),
                    labels: format!("segment_{i}_labels.json"),
                    wall_clock_start: s.wall_clock_start,
                })
                .collect(),
        )
    }

    /// Writes `manifest.json`, one capture/labels pair per segment, and
    /// `truth.json` into `dir`. Returns the manifest path.
    pub fn write(&self, dir: &Path) -> Result<std::path::PathBuf, SpecError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| SpecError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let manifest = self.manifest();
        for (seg, r) in self.segments.iter().zip(&manifest.segments) {
            let cp = dir.join(&r.capture);
            std::fs::write(&cp, serialize_capture(&seg.capture)).map_err(io(&cp))?;
            let lp = dir.join(&r.labels);
            std::fs::write(&lp, serialize_labels(&seg.labels)).map_err(io(&lp))?;
        }
        let tp = dir.join("truth.json");
        let truth = serde_json::to_vec_pretty(&self.truth).expect("truth serializes");
        std::fs::write(&tp, truth).map_err(io(&tp))?;
        let mp = dir.join("manifest.json");
        std::fs::write(&mp, serialize_manifest(&manifest)).map_err(io(&mp))?;
        Ok(mp)
    }

    /// Builds the in-memory dataset without touching the filesystem.
    pub fn to_dataset(&self) -> crate::model::Dataset {
        let segments = self
            .segments
            .iter()
            .map(|s| crate::model::Segment {
                capture: s.capture.clone(),
                labels: s.labels.clone(),
                wall_clock_start: s.wall_clock_start,
                frame_offset: 0,
                warnings: Vec::new(),
            })
            .collect();
        crate::model::Dataset::new(self.dataset_id.clone(), segments)
            .expect("generated segments are disjoint")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.as_str().parse::<Scenario>().unwrap(), s);
        }
        assert!(matches!(
            "moonwalk".parse::<Scenario>(),
            Err(SpecError::UnknownScenario(_))
        ));
    }

    #[test]
    fn invalid_specs_rejected() {
        let s = ScenarioSpec::new(Scenario::CleanWalk, 1).with_duration(0.0);
        assert!(generate(&s).is_err());
        let mut s = ScenarioSpec::new(Scenario::FreezeWalk, 1).with_duration(5.0);
        s.params.freeze_count = 3;
        assert!(generate(&s).is_err());
        let mut s = ScenarioSpec::new(Scenario::WeightBiasWalk, 1);
        s.params.weight_bias_m = 0.2;
        assert!(generate(&s).is_err());
    }

    #[test]
    fn freeze_truth_lies_inside_walking() {
        let mut spec = ScenarioSpec::new(Scenario::FreezeWalk, 3);
        spec.params.freeze_count = 2;
        let g = generate(&spec).unwrap();
        let walk = g.segments[0].labels[0];
        let freezes: Vec<_> = g.truth.of_kind(DeficitKind::Freeze).collect();
        assert_eq!(freezes.len(), 2);
        for f in freezes {
            assert!(walk.start_frame <= f.start_frame && f.end_frame <= walk.end_frame);
            assert_eq!(f.end_frame - f.start_frame, 45);
        }
    }
}
