//! Pelvis-local coordinate frame and the four body variables: trunk angle,
//! arm use, foot position and weight shift.
//!
//! The local frame is `x_hat` = horizontal direction from the left hip to
//! the pelvis (toward the subject's right), `y_hat` = world up, and
//! `z_hat = y_hat × x_hat`, which points anatomically forward for right-handed
//! y-up input.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::KinematicsConfig;
use crate::geometry::Vec3;
use crate::model::{CanonicalJoint, Capture};

/// Minimum length, in meters, of any vector that gets normalized.
pub const EPSILON_M: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum KinematicsError {
    #[error("pelvis and left hip coincide horizontally")]
    DegenerateFrame,
    #[error("neck coincides with pelvis")]
    DegenerateTrunk,
    #[error("both feet are coronally aligned with the pelvis")]
    FeetCoincident,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalFrame {
    pub x_hat: Vec3,
    pub y_hat: Vec3,
    pub z_hat: Vec3,
    pub valid: bool,
}

impl LocalFrame {
    /// Rebuilds a frame from its coronal axis.
    pub fn from_coronal(x_hat: Vec3, forward_flip: bool) -> Self {
        let z = Vec3::UP.cross(x_hat);
        Self {
            x_hat,
            y_hat: Vec3::UP,
            z_hat: if forward_flip { -z } else { z },
            valid: true,
        }
    }
}

pub fn pelvis_frame(
    pelvis: Vec3,
    left_hip: Vec3,
    forward_flip: bool,
) -> Result<LocalFrame, KinematicsError> {
    let h = (pelvis - left_hip).horizontal();
    let n = h.norm();
    if n.is_nan() || n <= EPSILON_M {
        return Err(KinematicsError::DegenerateFrame);
    }
    Ok(LocalFrame::from_coronal(h * (1.0 / n), forward_flip))
}

/// Angle in degrees between the pelvis-to-neck vector and vertical; 0 when
/// upright.
pub fn trunk_angle(pelvis: Vec3, neck: Vec3, frame: &LocalFrame) -> Result<f64, KinematicsError> {
    let t = neck - pelvis;
    let n = t.norm();
    if n.is_nan() || n <= EPSILON_M {
        return Err(KinematicsError::DegenerateTrunk);
    }
    let c = (t.dot(frame.y_hat) / n).clamp(-1.0, 1.0);
    Ok(c.acos().to_degrees())
}

/// Unsigned forward distance between pelvis and hand.
pub fn arm_use(pelvis: Vec3, hand: Vec3, frame: &LocalFrame) -> f64 {
    (pelvis - hand).dot(frame.z_hat).abs()
}

/// Signed forward distance of the foot from the pelvis; positive in front.
pub fn foot_position(pelvis: Vec3, foot: Vec3, frame: &LocalFrame) -> f64 {
    (foot - pelvis).dot(frame.z_hat)
}

/// Per-side load ratios `(weight_l, weight_r)` from coronal pelvis-to-foot
/// distances. The pelvis sits closer to the loaded foot, so by default each
/// side's weight uses the opposite side's distance in the numerator;
/// `literal` swaps that.
pub fn weight_shift(
    pelvis: Vec3,
    left_foot: Vec3,
    right_foot: Vec3,
    frame: &LocalFrame,
    literal: bool,
) -> Result<(f64, f64), KinematicsError> {
    let rho_l = (pelvis - left_foot).dot(frame.x_hat).abs();
    let rho_r = (pelvis - right_foot).dot(frame.x_hat).abs();
    let sum = rho_l + rho_r;
    if sum.is_nan() || sum <= EPSILON_M {
        return Err(KinematicsError::FeetCoincident);
    }
    let (wl, wr) = if literal {
        (rho_l / sum, rho_r / sum)
    } else {
        (rho_r / sum, rho_l / sum)
    };
    Ok((wl, wr))
}

/// The canonical joints of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyPose {
    pub pelvis: Vec3,
    pub left_hip: Vec3,
    pub right_hip: Vec3,
    pub neck: Vec3,
    pub left_hand: Vec3,
    pub right_hand: Vec3,
    pub left_foot: Vec3,
    pub right_foot: Vec3,
}

impl BodyPose {
    pub fn from_capture(capture: &Capture, frame: usize) -> Self {
        let j = |c| capture.canonical(frame, c);
        Self {
            pelvis: j(CanonicalJoint::Pelvis),
            left_hip: j(CanonicalJoint::LeftHip),
            right_hip: j(CanonicalJoint::RightHip),
            neck: j(CanonicalJoint::Neck),
            left_hand: j(CanonicalJoint::LeftHand),
            right_hand: j(CanonicalJoint::RightHand),
            left_foot: j(CanonicalJoint::LeftFoot),
            right_foot: j(CanonicalJoint::RightFoot),
        }
    }

    pub fn local_frame(&self, cfg: &KinematicsConfig) -> Result<LocalFrame, KinematicsError> {
        pelvis_frame(self.pelvis, self.left_hip, cfg.forward_flip)
    }

    /// All body variables against a given frame. Trunk and weight values are
    /// NaN when their own inputs are degenerate.
    pub fn variables(&self, frame: &LocalFrame, cfg: &KinematicsConfig) -> FrameVariables {
        let trunk_deg = trunk_angle(self.pelvis, self.neck, frame).unwrap_or(f64::NAN);
        let (weight_l, weight_r) = weight_shift(
            self.pelvis,
            self.left_foot,
            self.right_foot,
            frame,
            cfg.weight_literal,
        )
        .unwrap_or((f64::NAN, f64::NAN));
        FrameVariables {
            trunk_deg,
            arm_use_l: arm_use(self.pelvis, self.left_hand, frame),
            arm_use_r: arm_use(self.pelvis, self.right_hand, frame),
            foot_pos_l: foot_position(self.pelvis, self.left_foot, frame),
            foot_pos_r: foot_position(self.pelvis, self.right_foot, frame),
            weight_l,
            weight_r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameVariables {
    pub trunk_deg: f64,
    pub arm_use_l: f64,
    pub arm_use_r: f64,
    pub foot_pos_l: f64,
    pub foot_pos_r: f64,
    pub weight_l: f64,
    pub weight_r: f64,
}

impl FrameVariables {
    pub fn get(&self, var: Variable) -> f64 {
        match var {
            Variable::Trunk => self.trunk_deg,
            Variable::ArmL => self.arm_use_l,
            Variable::ArmR => self.arm_use_r,
            Variable::FootL => self.foot_pos_l,
            Variable::FootR => self.foot_pos_r,
            Variable::WeightL => self.weight_l,
            Variable::WeightR => self.weight_r,
        }
    }
}

/// A per-frame body variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Trunk,
    ArmL,
    ArmR,
    FootL,
    FootR,
    WeightL,
    WeightR,
}

impl Variable {
    pub const ALL: [Variable; 7] = [
        Variable::Trunk,
        Variable::ArmL,
        Variable::ArmR,
        Variable::FootL,
        Variable::FootR,
        Variable::WeightL,
        Variable::WeightR,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variable::Trunk => "trunk",
            Variable::ArmL => "arm_l",
            Variable::ArmR => "arm_r",
            Variable::FootL => "foot_l",
            Variable::FootR => "foot_r",
            Variable::WeightL => "weight_l",
            Variable::WeightR => "weight_r",
        }
    }

    /// `(left, right)` for sided variables.
    pub fn pair(self) -> Option<(Variable, Variable)> {
        match self {
            Variable::Trunk => None,
            Variable::ArmL | Variable::ArmR => Some((Variable::ArmL, Variable::ArmR)),
            Variable::FootL | Variable::FootR => Some((Variable::FootL, Variable::FootR)),
            Variable::WeightL | Variable::WeightR => Some((Variable::WeightL, Variable::WeightR)),
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Variable::Trunk => "deg",
            Variable::ArmL | Variable::ArmR | Variable::FootL | Variable::FootR => "m",
            Variable::WeightL | Variable::WeightR => "ratio",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown variable `{0}`")]
pub struct UnknownVariable(pub String);

impl FromStr for Variable {
    type Err = UnknownVariable;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variable::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| UnknownVariable(s.to_string()))
    }
}

/// Body variables for every frame of one capture.
///
/// Gaps are stored as NaN. A frame is valid when a local frame could be
/// established for it (directly or through the short fallback); trunk and
/// weight values may still be NaN on a valid frame when their own inputs are
/// degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyVariableSeries {
    fps: f64,
    values: [Vec<f64>; 7],
    valid: Vec<bool>,
    suspect: Vec<bool>,
    coronal: Vec<Vec3>,
    forward_flip: bool,
}

impl BodyVariableSeries {
    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.valid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valid.is_empty()
    }

    pub fn is_valid(&self, frame: usize) -> bool {
        self.valid[frame]
    }

    /// Displacement beyond the sanity bound; usually a unit mistake.
    pub fn is_suspect(&self, frame: usize) -> bool {
        self.suspect[frame]
    }

    pub fn values(&self, var: Variable) -> &[f64] {
        &self.values[var.index()]
    }

    pub fn value(&self, var: Variable, frame: usize) -> Option<f64> {
        let v = self.values[var.index()][frame];
        v.is_finite().then_some(v)
    }

    pub fn local_frame(&self, frame: usize) -> Option<LocalFrame> {
        self.valid[frame]
            .then(|| LocalFrame::from_coronal(self.coronal[frame], self.forward_flip))
    }

    pub fn gap_count(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }
}

/// Computes every body variable for every frame in one linear pass.
///
/// A degenerate pelvis frame reuses the most recent valid local frame when
/// it is at most `fallback_frames` frames old; otherwise the frame is a gap.
pub fn compute_series(capture: &Capture, cfg: &KinematicsConfig) -> BodyVariableSeries {
    let n = capture.frame_count();
    let mut values: [Vec<f64>; 7] = std::array::from_fn(|_| Vec::with_capacity(n));
    let mut valid = Vec::with_capacity(n);
    let mut suspect = Vec::with_capacity(n);
    let mut coronal = Vec::with_capacity(n);
    let mut last: Option<(usize, LocalFrame)> = None;
    let gap = Vec3::new(f64::NAN, f64::NAN, f64::NAN);

    for i in 0..n {
        let frame = if capture.is_valid(i) {
            let pose = BodyPose::from_capture(capture, i);
            match pose.local_frame(cfg) {
                Ok(f) => {
                    last = Some((i, f));
                    Some((pose, f))
                }
                Err(_) => last
                    .filter(|(j, _)| i - j <= cfg.fallback_frames)
                    .map(|(_, f)| (pose, f)),
            }
        } else {
            None
        };
        match frame {
            Some((pose, f)) => {
                let vars = pose.variables(&f, cfg);
                for var in Variable::ALL {
                    values[var.index()].push(vars.get(var));
                }
                let bound = cfg.sanity_bound_m;
                suspect.push(
                    vars.arm_use_l > bound
                        || vars.arm_use_r > bound
                        || vars.foot_pos_l.abs() > bound
                        || vars.foot_pos_r.abs() > bound,
                );
                valid.push(true);
                coronal.push(f.x_hat);
            }
            None => {
                for v in values.iter_mut() {
                    v.push(f64::NAN);
                }
                suspect.push(false);
                valid.push(false);
                coronal.push(gap);
            }
        }
    }

    BodyVariableSeries {
        fps: capture.fps(),
        values,
        valid,
        suspect,
        coronal,
        forward_flip: cfg.forward_flip,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn upright() -> LocalFrame {
        pelvis_frame(Vec3::new(0.0, 1.0, 0.0), Vec3::new(-0.1, 0.95, 0.0), false).unwrap()
    }

    #[test]
    fn frame_from_hip_offset() {
        let f = upright();
        assert_eq!(f.x_hat, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(f.y_hat, Vec3::UP);
        assert_eq!(f.z_hat, Vec3::new(0.0, 0.0, -1.0));
        assert!(f.x_hat.dot(f.z_hat).abs() < TOL);
    }

    #[test]
    fn forward_flip_negates_z() {
        let f = pelvis_frame(Vec3::new(0.0, 1.0, 0.0), Vec3::new(-0.1, 0.95, 0.0), true).unwrap();
        assert_eq!(f.z_hat, Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn degenerate_frame() {
        let p = Vec3::new(0.3, 1.0, 0.2);
        assert_eq!(pelvis_frame(p, p, false), Err(KinematicsError::DegenerateFrame));
        // Vertically stacked joints are degenerate too.
        assert_eq!(
            pelvis_frame(p, p + Vec3::new(0.0, -0.2, 0.0), false),
            Err(KinematicsError::DegenerateFrame)
        );
    }

    #[test]
    fn trunk_angle_examples() {
        let f = upright();
        let p = Vec3::new(0.0, 1.0, 0.0);
        assert!(trunk_angle(p, Vec3::new(0.0, 1.5, 0.0), &f).unwrap().abs() < TOL);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = trunk_angle(p, p + Vec3::new(0.0, s, s), &f).unwrap();
        assert!((a - 45.0).abs() < 1e-9, "{a}");
        let a = trunk_angle(p, p + Vec3::new(0.0, 0.0, 0.5), &f).unwrap();
        assert!((a - 90.0).abs() < 1e-9);
        assert_eq!(trunk_angle(p, p, &f), Err(KinematicsError::DegenerateTrunk));
    }

    #[test]
    fn arm_use_examples() {
        let f = upright();
        let p = Vec3::new(0.0, 1.0, 0.0);
        assert!(arm_use(p, Vec3::new(0.0, 0.6, 0.0), &f).abs() < TOL);
        let a = arm_use(p, p + f.z_hat * 0.3, &f);
        assert!((a - 0.3).abs() < TOL);
    }

    #[test]
    fn foot_position_sign() {
        let f = upright();
        let p = Vec3::new(0.0, 1.0, 0.0);
        assert!((foot_position(p, p + f.z_hat * 0.4, &f) - 0.4).abs() < TOL);
        assert!(foot_position(p, Vec3::new(0.0, 0.0, 0.0), &f).abs() < TOL);
        assert!((foot_position(p, p - f.z_hat * 0.2, &f) + 0.2).abs() < TOL);
    }

    #[test]
    fn weight_shift_examples() {
        let f = upright();
        let p = Vec3::new(0.0, 1.0, 0.0);
        let (l, r) = weight_shift(p, Vec3::new(-0.1, 0.0, 0.0), Vec3::new(0.1, 0.0, 0.0), &f, false).unwrap();
        assert!((l - 0.5).abs() < TOL && (r - 0.5).abs() < TOL);

        // Pelvis 0.1 m from the left foot, 0.3 m from the right one.
        let (l, r) = weight_shift(p, Vec3::new(-0.1, 0.0, 0.0), Vec3::new(0.3, 0.0, 0.0), &f, false).unwrap();
        assert!((l - 0.75).abs() < TOL);
        assert!((l + r - 1.0).abs() < TOL);

        let (l, _) = weight_shift(p, Vec3::new(-0.1, 0.0, 0.0), Vec3::new(0.3, 0.0, 0.0), &f, true).unwrap();
        assert!((l - 0.25).abs() < TOL);

        assert_eq!(
            weight_shift(p, Vec3::new(0.0, 0.0, 0.3), Vec3::new(0.0, 0.0, -0.3), &f, false),
            Err(KinematicsError::FeetCoincident)
        );
    }

    #[test]
    fn variable_names_round_trip() {
        for v in Variable::ALL {
            assert_eq!(v.as_str().parse::<Variable>().unwrap(), v);
        }
        assert!("knee".parse::<Variable>().is_err());
        assert_eq!(Variable::WeightR.pair(), Some((Variable::WeightL, Variable::WeightR)));
    }
}
