//! Fixtures and reference implementations shared by integration tests.
//! The references are written for clarity, not speed, and do not call into
//! the library code they check.
#![allow(dead_code)]

use motion_insight_core::model::Capture;
use motion_insight_core::Vec3;
use rand::Rng;

pub const CANONICAL: [&str; 8] = [
    "pelvis",
    "left_hip",
    "right_hip",
    "neck",
    "left_hand",
    "right_hand",
    "left_foot",
    "right_foot",
];

/// Pose in `CANONICAL` order.
pub type Pose = [Vec3; 8];

pub fn canonical_capture(fps: f64, poses: &[Option<Pose>]) -> Capture {
    let nan = Vec3::new(f64::NAN, f64::NAN, f64::NAN);
    let mut positions = Vec::with_capacity(poses.len() * 8);
    for p in poses {
        match p {
            Some(p) => positions.extend_from_slice(p),
            None => positions.extend_from_slice(&[nan; 8]),
        }
    }
    Capture::new(
        fps,
        CANONICAL.iter().map(|s| s.to_string()).collect(),
        positions,
        None,
    )
    .unwrap()
}

/// Upright body facing -z with the given sagittal foot offsets. `None` is a
/// tracking gap.
pub fn feet_capture(fps: f64, feet: &[Option<(f64, f64)>]) -> Capture {
    let poses: Vec<Option<Pose>> = feet
        .iter()
        .map(|f| {
            f.map(|(l, r)| {
                [
                    Vec3::new(0.0, 1.0, 0.0),
                    Vec3::new(-0.1, 0.95, 0.0),
                    Vec3::new(0.1, 0.95, 0.0),
                    Vec3::new(0.0, 1.5, 0.0),
                    Vec3::new(-0.3, 0.8, 0.0),
                    Vec3::new(0.3, 0.8, 0.0),
                    Vec3::new(-0.1, 0.0, -l),
                    Vec3::new(0.1, 0.0, -r),
                ]
            })
        })
        .collect();
    canonical_capture(fps, &poses)
}

/// Alternating bursts of striding, pinned feet and tracking gaps. Burst
/// lengths straddle the one-second boundary at 30 fps and the five-frame
/// gap bridge, and some values sit exactly on the threshold.
pub fn random_feet<R: Rng>(rng: &mut R, n: usize) -> Vec<Option<(f64, f64)>> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (len, kind) = match rng.random_range(0..10) {
            0..=3 => (rng.random_range(1..60), 0),
            4..=7 => (rng.random_range(1..80), 1),
            _ => (rng.random_range(1..9), 2),
        };
        for _ in 0..len {
            let f = match kind {
                0 => {
                    let big = if rng.random_bool(0.1) {
                        0.15
                    } else {
                        rng.random_range(0.15..0.5)
                    };
                    let big = if rng.random_bool(0.5) { big } else { -big };
                    let other = rng.random_range(-0.5..0.5);
                    Some(if rng.random_bool(0.5) {
                        (big, other)
                    } else {
                        (other, big)
                    })
                }
                1 => Some((rng.random_range(-0.149..0.149), rng.random_range(-0.149..0.149))),
                _ => None,
            };
            out.push(f);
        }
    }
    out.truncate(n);
    out
}

/// Reference freeze detection over `feet[from..to]`: pinned frames are
/// chained when everything between two of them is a short gap; each chain
/// spanning at least `min_s` becomes an interval `[first, last + 1)`.
pub fn freeze_oracle(
    feet: &[Option<(f64, f64)>],
    from: usize,
    to: usize,
    fps: f64,
    threshold: f64,
    max_gap: usize,
    min_s: f64,
) -> Vec<(usize, usize)> {
    let pinned: Vec<usize> = (from..to)
        .filter(|&i| matches!(feet[i], Some((l, r)) if l.abs() < threshold && r.abs() < threshold))
        .collect();
    let mut chains: Vec<(usize, usize)> = Vec::new();
    for &p in &pinned {
        if let Some(last) = chains.last_mut() {
            let between = &feet[last.1 + 1..p];
            if between.len() <= max_gap && between.iter().all(|f| f.is_none()) {
                last.1 = p;
                continue;
            }
        }
        chains.push((p, p));
    }
    chains
        .into_iter()
        .map(|(a, b)| (a, b + 1))
        .filter(|&(a, b)| (b - a) as f64 / fps >= min_s)
        .collect()
}

pub fn rotate_y(v: Vec3, theta: f64) -> Vec3 {
    let (s, c) = theta.sin_cos();
    Vec3::new(c * v.x + s * v.z, v.y, -s * v.x + c * v.z)
}

/// A plausible but randomized body: symmetric hips around the pelvis, neck
/// tilted up to 60 degrees, hands and feet anywhere within reach.
pub fn random_pose<R: Rng>(rng: &mut R) -> Pose {
    let heading = rng.random_range(0.0..std::f64::consts::TAU);
    let pelvis = Vec3::new(
        rng.random_range(-5.0..5.0),
        rng.random_range(0.4..1.1),
        rng.random_range(-5.0..5.0),
    );
    let hip = Vec3::new(rng.random_range(0.06..0.16), rng.random_range(-0.08..0.0), 0.0);
    let local = |v: Vec3| pelvis + rotate_y(v, heading);
    let tilt = rng.random_range(0.0..60f64).to_radians();
    let dir = rng.random_range(0.0..std::f64::consts::TAU);
    let neck_len = rng.random_range(0.4..0.6);
    let neck = Vec3::new(
        tilt.sin() * dir.cos(),
        tilt.cos(),
        tilt.sin() * dir.sin(),
    ) * neck_len;
    let mut limb = |y0: f64, y1: f64| {
        Vec3::new(
            rng.random_range(-0.6..0.6),
            rng.random_range(y0..y1),
            rng.random_range(-0.6..0.6),
        )
    };
    let lh = limb(-0.4, 0.6);
    let rh = limb(-0.4, 0.6);
    let lf = limb(-1.0, -0.3);
    let rf = limb(-1.0, -0.3);
    [
        pelvis,
        local(Vec3::new(-hip.x, hip.y, 0.0)),
        local(Vec3::new(hip.x, hip.y, 0.0)),
        local(neck),
        local(lh),
        local(rh),
        local(lf),
        local(rf),
    ]
}

pub fn transform(pose: &Pose, theta: f64, shift: Vec3) -> Pose {
    pose.map(|p| rotate_y(p, theta) + shift)
}

/// Reflects through the body's sagittal plane and swaps side labels.
pub fn mirror(pose: &Pose) -> Pose {
    let p = pose[0];
    let across = p - pose[1];
    let x = Vec3::new(across.x, 0.0, across.z) * (1.0 / across.horizontal().norm());
    let reflect = |v: Vec3| v - x * (2.0 * (v - p).dot(x));
    [
        p,
        reflect(pose[2]),
        reflect(pose[1]),
        reflect(pose[3]),
        reflect(pose[5]),
        reflect(pose[4]),
        reflect(pose[7]),
        reflect(pose[6]),
    ]
}

/// Values with level shifts, spikes and occasional gaps.
pub fn random_slice<R: Rng>(rng: &mut R) -> Vec<f64> {
    let n = rng.random_range(1..2000);
    let mut level = rng.random_range(-10.0..10.0);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        if rng.random_bool(0.02) {
            level = rng.random_range(-10.0..10.0);
        }
        let v = if rng.random_bool(0.03) {
            f64::NAN
        } else if rng.random_bool(0.05) {
            level + rng.random_range(-40.0..40.0)
        } else {
            level + rng.random_range(-1.0..1.0)
        };
        out.push(v);
    }
    out
}

pub fn population_mean_sigma(values: &[f64]) -> Option<(f64, f64)> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return None;
    }
    let n = finite.len() as f64;
    let mean = finite.iter().sum::<f64>() / n;
    let var = finite.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Reference sigma binning: label each frame, then cut wherever the label
/// changes or a gap appears. Returns `(start, end, mean, outlier)`.
pub fn simplify_oracle(
    values: &[f64],
    start_frame: usize,
    mean: f64,
    sigma: f64,
) -> Vec<(usize, usize, f64, bool)> {
    let labels: Vec<Option<bool>> = values
        .iter()
        .map(|v| v.is_finite().then(|| (v - mean).abs() > sigma))
        .collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < values.len() {
        let Some(label) = labels[k] else {
            k += 1;
            continue;
        };
        let mut e = k;
        while e < values.len() && labels[e] == Some(label) {
            e += 1;
        }
        let avg = values[k..e].iter().sum::<f64>() / (e - k) as f64;
        out.push((start_frame + k, start_frame + e, avg, label));
        k = e;
    }
    out
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-3)
}
