//! Block-structured activity simulation.
//!
//! A segment is a sequence of non-overlapping base blocks (sitting,
//! standing, walking, transitions). Overlays layer nested actions (reaching,
//! taking medicine) and injected deficits (falls, freezes) on top of a block.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use super::body::{Pose, JOINTS};
use super::{DeficitKind, DeficitRecord};
use crate::geometry::Vec3;
use crate::model::{Action, ActionLabel};

const NOISE_SIGMA_M: f64 = 0.002;
const WALK_SPEED: f64 = 1.0;
const TURN_RATE: f64 = 0.15;
const CADENCE_HZ: f64 = 0.9;
const FOOT_AMPLITUDE: f64 = 0.3;
const ARM_AMPLITUDE: f64 = 0.25;
const FREEZE_TREMBLE_M: f64 = 0.02;
const STANDING_HEIGHT: f64 = 0.95;
const SITTING_HEIGHT: f64 = 0.5;
const FALL_HEIGHT: f64 = 0.35;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum BlockKind {
    Sitting,
    Standing,
    Walking { arm_scale: [f64; 2] },
    SitToStand { attempts: u32 },
    StandToSit,
}

impl BlockKind {
    fn action(self) -> Action {
        match self {
            BlockKind::Sitting => Action::Sitting,
            BlockKind::Standing => Action::Standing,
            BlockKind::Walking { .. } => Action::Walking,
            BlockKind::SitToStand { .. } => Action::SitToStand,
            BlockKind::StandToSit => Action::StandToSit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum OverlayKind {
    Reach,
    Medicine,
    Fall { trunk_deg: f64 },
    /// Requested start; the freeze begins at the next gait-phase peak.
    Freeze,
}

/// Times are seconds relative to the block start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Overlay {
    pub kind: OverlayKind,
    pub start_s: f64,
    pub len_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Block {
    pub kind: BlockKind,
    pub len_s: f64,
    /// Coronal pelvis shift toward the left foot, meters.
    pub weight_bias_m: f64,
    pub overlays: Vec<Overlay>,
}

impl Block {
    pub fn new(kind: BlockKind, len_s: f64) -> Self {
        Self {
            kind,
            len_s,
            weight_bias_m: 0.0,
            overlays: Vec::new(),
        }
    }

    pub fn with(mut self, kind: OverlayKind, start_s: f64, len_s: f64) -> Self {
        self.overlays.push(Overlay {
            kind,
            start_s,
            len_s,
        });
        self
    }

    pub fn biased(mut self, weight_bias_m: f64) -> Self {
        self.weight_bias_m = weight_bias_m;
        self
    }
}

pub(crate) struct SegmentOutput {
    pub positions: Vec<Vec3>,
    pub labels: Vec<ActionLabel>,
    pub deficits: Vec<DeficitRecord>,
    pub frame_count: usize,
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// 0 → 1 over `rise` seconds, hold, 1 → 0 over the last `fall` seconds.
fn plateau(t: f64, len: f64, rise: f64, fall: f64) -> f64 {
    if t < 0.0 || t >= len {
        0.0
    } else if t < rise {
        smoothstep(t / rise)
    } else if t > len - fall {
        smoothstep((len - t) / fall)
    } else {
        1.0
    }
}

fn frames(seconds: f64, fps: f64) -> usize {
    (seconds * fps).round() as usize
}

/// Rounds to 0.1 mm so serialized captures stay compact and parse back to
/// identical values.
fn quantize(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

pub(crate) struct Simulator {
    fps: f64,
    segment: usize,
    rng: ChaCha8Rng,
    noise: Normal<f64>,
    root_x: f64,
    root_z: f64,
    heading: f64,
    phase: f64,
}

impl Simulator {
    pub fn new(fps: f64, seed: u64, segment: usize) -> Self {
        Self {
            fps,
            segment,
            rng: ChaCha8Rng::seed_from_u64(seed ^ (segment as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            noise: Normal::new(0.0, NOISE_SIGMA_M).unwrap(),
            root_x: 0.0,
            root_z: 0.0,
            heading: 0.0,
            phase: 0.0,
        }
    }

    pub fn run(mut self, blocks: &[Block]) -> SegmentOutput {
        let total: usize = blocks.iter().map(|b| frames(b.len_s, self.fps)).sum();
        let mut out = SegmentOutput {
            positions: Vec::with_capacity(total * JOINTS.len()),
            labels: Vec::new(),
            deficits: Vec::new(),
            frame_count: 0,
        };
        for b in blocks {
            self.run_block(b, &mut out);
        }
        out
    }

    fn base_pose(&self) -> Pose {
        Pose {
            root_x: self.root_x,
            root_z: self.root_z,
            heading: self.heading,
            pelvis_height: STANDING_HEIGHT,
            trunk_deg: 5.0,
            sway: 0.0,
            foot_fwd: [0.0, 0.0],
            foot_lift: [0.0, 0.0],
            hand_fwd: [0.03, 0.03],
            hand_up: [-0.15, -0.15],
        }
    }

    fn run_block(&mut self, block: &Block, out: &mut SegmentOutput) {
        let fps = self.fps;
        let dt = 1.0 / fps;
        let n = frames(block.len_s, fps);
        let start = out.frame_count;
        out.labels
            .push(ActionLabel::new(block.kind.action(), start, start + n));

        // Freeze scheduling: (requested start frame, length in frames).
        let mut pending: Vec<(usize, usize)> = block
            .overlays
            .iter()
            .filter(|o| o.kind == OverlayKind::Freeze)
            .map(|o| (frames(o.start_s, fps), frames(o.len_s, fps)))
            .collect();
        pending.sort_unstable();
        pending.reverse();
        let mut freeze_left = 0usize;

        self.phase = 0.0;
        for k in 0..n {
            let t = k as f64 * dt;
            let u = k as f64 / n as f64;
            let mut p = self.base_pose();
            p.sway = block.weight_bias_m;

            match block.kind {
                BlockKind::Sitting => {
                    p.pelvis_height = SITTING_HEIGHT;
                    p.trunk_deg = 8.0 + (TAU * 0.25 * t).sin();
                    p.foot_fwd = [0.45, 0.45];
                    p.hand_fwd = [0.28, 0.28];
                    p.hand_up = [0.02, 0.02];
                }
                BlockKind::Standing => {
                    p.trunk_deg = 5.0 + 1.5 * (TAU * 0.2 * t).sin();
                    p.foot_fwd = [0.02, -0.01];
                }
                BlockKind::Walking { arm_scale } => {
                    if freeze_left == 0 {
                        if let Some(&(req, len)) = pending.last() {
                            // Enter at a phase peak so the feet leave the
                            // stride from their widest split.
                            if k >= req && self.phase.sin().abs() >= (TAU * CADENCE_HZ * dt).cos() {
                                pending.pop();
                                freeze_left = len.min(n - k);
                                out.deficits.push(DeficitRecord {
                                    kind: DeficitKind::Freeze,
                                    segment: self.segment,
                                    start_frame: start + k,
                                    end_frame: start + k + freeze_left,
                                    params: json!({
                                        "duration_s": freeze_left as f64 / fps,
                                        "tremble_m": FREEZE_TREMBLE_M,
                                        "event_start_frame": start,
                                    }),
                                });
                            }
                        }
                    }
                    if freeze_left > 0 {
                        freeze_left -= 1;
                        let tremble = FREEZE_TREMBLE_M * (TAU * 6.0 * t).sin();
                        p.foot_fwd = [tremble, -tremble];
                        p.hand_fwd = [0.03 + tremble, 0.03 - tremble];
                    } else {
                        let s = self.phase.sin();
                        p.foot_fwd = [FOOT_AMPLITUDE * s, -FOOT_AMPLITUDE * s];
                        p.foot_lift = [
                            0.05 * self.phase.cos().max(0.0),
                            0.05 * (-self.phase.cos()).max(0.0),
                        ];
                        p.hand_fwd = [
                            -ARM_AMPLITUDE * arm_scale[0] * s,
                            ARM_AMPLITUDE * arm_scale[1] * s,
                        ];
                        p.trunk_deg = 5.0 + (2.0 * self.phase).sin();
                        p.pelvis_height = STANDING_HEIGHT + 0.015 * (2.0 * self.phase).cos();
                        p.sway += 0.015 * s;
                        self.phase += TAU * CADENCE_HZ * dt;
                        let (_, fwd) = p.axes();
                        self.root_x += fwd.x * WALK_SPEED * dt;
                        self.root_z += fwd.z * WALK_SPEED * dt;
                        self.heading += TURN_RATE * dt;
                    }
                }
                BlockKind::SitToStand { attempts } => {
                    let m = attempts.max(1) as f64;
                    let rise = smoothstep((u - (m - 1.0) / m) * m);
                    self.transition(&mut p, rise, 30.0 * (PI * m * u).sin().abs());
                }
                BlockKind::StandToSit => {
                    self.transition(&mut p, 1.0 - smoothstep(u), 30.0 * (PI * u).sin());
                }
            }

            for o in &block.overlays {
                let ot = t - o.start_s;
                match o.kind {
                    OverlayKind::Reach => {
                        let env = if (0.0..o.len_s).contains(&ot) {
                            (PI * ot / o.len_s).sin()
                        } else {
                            0.0
                        };
                        p.hand_fwd[1] += 0.5 * env;
                        p.hand_up[1] += 0.25 * env;
                        p.trunk_deg += 10.0 * env;
                    }
                    OverlayKind::Medicine => {
                        let env = plateau(ot, o.len_s, 1.5, 1.5);
                        p.hand_fwd[1] = lerp(p.hand_fwd[1], 0.2, env);
                        p.hand_up[1] = lerp(p.hand_up[1], 0.45, env);
                    }
                    OverlayKind::Fall { trunk_deg } => {
                        let env = plateau(ot, o.len_s, 1.0, 2.0);
                        p.trunk_deg = lerp(p.trunk_deg, trunk_deg, env);
                        p.pelvis_height = lerp(p.pelvis_height, FALL_HEIGHT, env);
                        p.hand_fwd = p.hand_fwd.map(|h| h + 0.3 * env);
                    }
                    OverlayKind::Freeze => {}
                }
            }

            self.emit(&p, &mut out.positions);
        }

        for o in &block.overlays {
            let s = start + frames(o.start_s, fps);
            let e = (s + frames(o.len_s, fps)).min(start + n);
            match o.kind {
                OverlayKind::Reach => out.labels.push(ActionLabel::new(Action::Reaching, s, e)),
                OverlayKind::Medicine => {
                    out.labels.push(ActionLabel::new(Action::TakingMedicine, s, e))
                }
                OverlayKind::Fall { trunk_deg } => out.deficits.push(DeficitRecord {
                    kind: DeficitKind::Fall,
                    segment: self.segment,
                    start_frame: s,
                    end_frame: e,
                    params: json!({
                        "trunk_deg": trunk_deg,
                        "pelvis_height_m": FALL_HEIGHT,
                        "event_start_frame": start,
                    }),
                }),
                OverlayKind::Freeze => {}
            }
        }
        match block.kind {
            BlockKind::Walking { arm_scale } if arm_scale[0] != arm_scale[1] => {
                out.deficits.push(DeficitRecord {
                    kind: DeficitKind::ImbalancedArm,
                    segment: self.segment,
                    start_frame: start,
                    end_frame: start + n,
                    params: json!({
                        "arm_ratio": arm_scale[0].max(arm_scale[1]) / arm_scale[0].min(arm_scale[1]),
                        "weak_side": if arm_scale[0] < arm_scale[1] { "left" } else { "right" },
                    }),
                })
            }
            BlockKind::SitToStand { attempts } if attempts > 1 => out.deficits.push(DeficitRecord {
                kind: DeficitKind::SlowSitToStand,
                segment: self.segment,
                start_frame: start,
                end_frame: start + n,
                params: json!({ "duration_s": n as f64 / fps, "attempts": attempts }),
            }),
            _ => {}
        }
        if block.weight_bias_m != 0.0 {
            out.deficits.push(DeficitRecord {
                kind: DeficitKind::WeightBias,
                segment: self.segment,
                start_frame: start,
                end_frame: start + n,
                params: json!({ "weight_bias_m": block.weight_bias_m }),
            });
        }
        out.frame_count += n;
    }

    /// Sit/stand interpolation; `standing` is 0 seated and 1 upright.
    fn transition(&self, p: &mut Pose, standing: f64, lean_deg: f64) {
        p.pelvis_height = lerp(SITTING_HEIGHT, STANDING_HEIGHT, standing);
        let f = 0.45 * (1.0 - standing);
        p.foot_fwd = [f, f];
        p.trunk_deg = lerp(8.0, 5.0, standing) + lean_deg;
        let h = lerp(0.28, 0.03, standing);
        p.hand_fwd = [h, h];
        let hu = lerp(0.02, -0.15, standing);
        p.hand_up = [hu, hu];
    }

    fn emit(&mut self, pose: &Pose, positions: &mut Vec<Vec3>) {
        for j in pose.joints() {
            let n = Vec3::new(
                self.noise.sample(&mut self.rng),
                self.noise.sample(&mut self.rng),
                self.noise.sample(&mut self.rng),
            );
            let p = j + n;
            positions.push(Vec3::new(quantize(p.x), quantize(p.y), quantize(p.z)));
        }
    }
}
