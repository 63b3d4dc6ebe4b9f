//! Parametric skeleton: a handful of pose parameters expressed in the
//! pelvis-local frame, placed in the world as 22 joints.

use crate::geometry::Vec3;

pub const JOINTS: [&str; 22] = [
    "pelvis",
    "left_hip",
    "right_hip",
    "spine1",
    "left_knee",
    "right_knee",
    "spine2",
    "left_ankle",
    "right_ankle",
    "spine3",
    "left_foot",
    "right_foot",
    "neck",
    "left_collar",
    "right_collar",
    "head",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_hand",
    "right_hand",
];

const HIP_HALF_WIDTH: f64 = 0.1;
pub const STANCE_HALF_WIDTH: f64 = 0.1;
const HAND_HALF_WIDTH: f64 = 0.22;
const NECK_HEIGHT: f64 = 0.55;
const FOOT_HEIGHT: f64 = 0.05;

/// Pose parameters. Index 0 is left, 1 is right. Sagittal offsets are
/// positive in front of the pelvis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub root_x: f64,
    pub root_z: f64,
    /// World yaw in radians.
    pub heading: f64,
    pub pelvis_height: f64,
    /// Forward trunk lean in degrees.
    pub trunk_deg: f64,
    /// Coronal shift of the pelvis toward the left foot, meters.
    pub sway: f64,
    pub foot_fwd: [f64; 2],
    pub foot_lift: [f64; 2],
    pub hand_fwd: [f64; 2],
    /// Hand height relative to the pelvis.
    pub hand_up: [f64; 2],
}

impl Pose {
    /// Unit vectors `(right, forward)` for the current heading, chosen so
    /// that `up × right = forward`.
    pub fn axes(&self) -> (Vec3, Vec3) {
        let (s, c) = self.heading.sin_cos();
        (Vec3::new(c, 0.0, -s), Vec3::new(-s, 0.0, -c))
    }

    pub fn joints(&self) -> [Vec3; 22] {
        let (right, fwd) = self.axes();
        let up = Vec3::UP;
        let pelvis = Vec3::new(self.root_x, self.pelvis_height, self.root_z);
        let at = |r: f64, u: f64, f: f64| pelvis + right * r + up * u + fwd * f;

        let (ls, lc) = self.trunk_deg.to_radians().sin_cos();
        let trunk = fwd * ls + up * lc;
        let along = |d: f64, r: f64| pelvis + trunk * d + right * r;

        let foot_u = -(self.pelvis_height - FOOT_HEIGHT);
        let left_hip = at(-HIP_HALF_WIDTH, -0.05, 0.0);
        let right_hip = at(HIP_HALF_WIDTH, -0.05, 0.0);
        let left_foot = at(
            -STANCE_HALF_WIDTH + self.sway,
            foot_u + self.foot_lift[0],
            self.foot_fwd[0],
        );
        let right_foot = at(
            STANCE_HALF_WIDTH + self.sway,
            foot_u + self.foot_lift[1],
            self.foot_fwd[1],
        );
        let knee = |hip: Vec3, foot: Vec3| (hip + foot) * 0.5 + fwd * 0.06;
        let ankle = |foot: Vec3| foot + up * 0.07 - fwd * 0.06;
        let left_shoulder = along(0.5, -0.18);
        let right_shoulder = along(0.5, 0.18);
        let left_hand = at(-HAND_HALF_WIDTH, self.hand_up[0], self.hand_fwd[0]);
        let right_hand = at(HAND_HALF_WIDTH, self.hand_up[1], self.hand_fwd[1]);

        [
            pelvis,
            left_hip,
            right_hip,
            along(0.12, 0.0),
            knee(left_hip, left_foot),
            knee(right_hip, right_foot),
            along(0.25, 0.0),
            ankle(left_foot),
            ankle(right_foot),
            along(0.38, 0.0),
            left_foot,
            right_foot,
            along(NECK_HEIGHT, 0.0),
            along(0.5, -0.07),
            along(0.5, 0.07),
            along(0.7, 0.0),
            left_shoulder,
            right_shoulder,
            (left_shoulder + left_hand) * 0.5,
            (right_shoulder + right_hand) * 0.5,
            left_hand,
            right_hand,
        ]
    }
}
