use std::fmt;

use chrono::{DateTime, FixedOffset};
use serde::de::{DeserializeSeed, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{CanonicalJoint, IngestError, FORMAT_VERSION};
use crate::geometry::Vec3;

/// A uniformly sampled sequence of named joint positions.
///
/// Positions are stored frame-major in a single flat buffer. Missing or
/// non-finite coordinates are normalized to NaN; a frame whose canonical
/// joints are not all finite is flagged invalid but kept so the timeline
/// stays continuous.
#[derive(Debug, Clone)]
pub struct Capture {
    fps: f64,
    joints: Vec<String>,
    positions: Vec<Vec3>,
    valid: Vec<bool>,
    start_time: Option<DateTime<FixedOffset>>,
    canonical: [usize; 8],
}

impl Capture {
    /// Builds a capture from a frame-major position buffer of
    /// `frame_count * joints.len()` entries.
    pub fn new(
        fps: f64,
        joints: Vec<String>,
        mut positions: Vec<Vec3>,
        start_time: Option<DateTime<FixedOffset>>,
    ) -> Result<Self, IngestError> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(IngestError::Schema(format!(
                "fps must be finite and positive, got {fps}"
            )));
        }
        if joints.is_empty() {
            return Err(IngestError::Schema("joint list is empty".into()));
        }
        for (i, name) in joints.iter().enumerate() {
            if joints[..i].contains(name) {
                return Err(IngestError::Schema(format!("duplicate joint `{name}`")));
            }
        }
        if positions.len() % joints.len() != 0 {
            return Err(IngestError::Schema(format!(
                "position buffer of {} entries is not a multiple of {} joints",
                positions.len(),
                joints.len()
            )));
        }
        let mut canonical = [0usize; 8];
        for cj in CanonicalJoint::ALL {
            canonical[cj.slot()] = joints
                .iter()
                .position(|j| j == cj.name())
                .ok_or_else(|| IngestError::Joint(cj.name().to_string()))?;
        }
        for p in positions.iter_mut() {
            for c in [&mut p.x, &mut p.y, &mut p.z] {
                if !c.is_finite() {
                    *c = f64::NAN;
                }
            }
        }
        let stride = joints.len();
        let valid = positions
            .chunks_exact(stride)
            .map(|frame| canonical.iter().all(|&j| frame[j].is_finite()))
            .collect();
        Ok(Self {
            fps,
            joints,
            positions,
            valid,
            start_time,
            canonical,
        })
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn joints(&self) -> &[String] {
        &self.joints
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j == name)
    }

    pub fn frame_count(&self) -> usize {
        self.valid.len()
    }

    pub fn duration_s(&self) -> f64 {
        self.frame_count() as f64 / self.fps
    }

    pub fn start_time(&self) -> Option<DateTime<FixedOffset>> {
        self.start_time
    }

    /// All joint positions of one frame, in joint-list order.
    pub fn frame(&self, index: usize) -> &[Vec3] {
        let stride = self.joints.len();
        &self.positions[index * stride..(index + 1) * stride]
    }

    pub fn is_valid(&self, index: usize) -> bool {
        self.valid[index]
    }

    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    pub fn canonical(&self, index: usize, joint: CanonicalJoint) -> Vec3 {
        self.frame(index)[self.canonical[joint.slot()]]
    }
}

impl PartialEq for Capture {
    fn eq(&self, other: &Self) -> bool {
        fn bits(v: &Vec3) -> [u64; 3] {
            [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()]
        }
        self.fps.to_bits() == other.fps.to_bits()
            && self.joints == other.joints
            && self.start_time == other.start_time
            && self.positions.len() == other.positions.len()
            && self
                .positions
                .iter()
                .zip(&other.positions)
                .all(|(a, b)| bits(a) == bits(b))
    }
}

#[derive(Deserialize)]
struct RawCapture {
    version: u32,
    fps: f64,
    units: String,
    up_axis: String,
    #[serde(default)]
    start_time: Option<String>,
    joints: Vec<String>,
    frames: RawFrames,
}

#[derive(Default)]
struct RawFrames {
    positions: Vec<Vec3>,
    lens: Vec<u32>,
}

impl<'de> Deserialize<'de> for RawFrames {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct FramesVisitor;

        impl<'de> Visitor<'de> for FramesVisitor {
            type Value = RawFrames;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an array of frames")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<RawFrames, A::Error> {
                let mut out = RawFrames::default();
                loop {
                    let before = out.positions.len();
                    if seq
                        .next_element_seed(FrameSeed(&mut out.positions))?
                        .is_none()
                    {
                        break;
                    }
                    out.lens.push((out.positions.len() - before) as u32);
                }
                Ok(out)
            }
        }

        deserializer.deserialize_seq(FramesVisitor)
    }
}

/// Streams one frame's joint slots straight into the flat buffer.
struct FrameSeed<'a>(&'a mut Vec<Vec3>);

impl<'de> DeserializeSeed<'de> for FrameSeed<'_> {
    type Value = ();

    fn deserialize<D: Deserializer<'de>>(self, deserializer: D) -> Result<(), D::Error> {
        deserializer.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for FrameSeed<'_> {
    type Value = ();

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("an array of joint positions")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<(), A::Error> {
        while let Some(slot) = seq.next_element::<Option<[Option<f64>; 3]>>()? {
            let p = match slot {
                Some([x, y, z]) => Vec3::new(
                    x.unwrap_or(f64::NAN),
                    y.unwrap_or(f64::NAN),
                    z.unwrap_or(f64::NAN),
                ),
                None => Vec3::new(f64::NAN, f64::NAN, f64::NAN),
            };
            self.0.push(p);
        }
        Ok(())
    }
}

/// Parses a capture file, validating schema, units and canonical joints.
pub fn parse_capture(bytes: &[u8]) -> Result<Capture, IngestError> {
    let raw: RawCapture =
        serde_json::from_slice(bytes).map_err(|e| IngestError::Schema(e.to_string()))?;
    if raw.version != FORMAT_VERSION {
        return Err(IngestError::Schema(format!(
            "unsupported version {}",
            raw.version
        )));
    }
    if raw.units != "meters" {
        return Err(IngestError::Unit(format!(
            "units must be \"meters\", got {:?}",
            raw.units
        )));
    }
    if raw.up_axis != "y" {
        return Err(IngestError::Unit(format!(
            "up_axis must be \"y\", got {:?}",
            raw.up_axis
        )));
    }
    let start_time = raw
        .start_time
        .map(|s| {
            DateTime::parse_from_rfc3339(&s)
                .map_err(|e| IngestError::Schema(format!("start_time {s:?}: {e}")))
        })
        .transpose()?;
    let arity = raw.joints.len();
    if let Some((i, n)) = raw
        .frames
        .lens
        .iter()
        .enumerate()
        .find(|(_, &n)| n as usize != arity)
    {
        return Err(IngestError::Schema(format!(
            "frame {i} has {n} positions, expected {arity}"
        )));
    }
    Capture::new(raw.fps, raw.joints, raw.frames.positions, start_time)
}

struct FramesOut<'a>(&'a Capture);
struct FrameOut<'a>(&'a [Vec3]);
struct SlotOut(Vec3);

impl Serialize for FramesOut<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let n = self.0.frame_count();
        let mut seq = s.serialize_seq(Some(n))?;
        for i in 0..n {
            seq.serialize_element(&FrameOut(self.0.frame(i)))?;
        }
        seq.end()
    }
}

impl Serialize for FrameOut<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for p in self.0 {
            seq.serialize_element(&SlotOut(*p))?;
        }
        seq.end()
    }
}

impl Serialize for SlotOut {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let coords = self.0.to_array();
        if coords.iter().all(|c| !c.is_finite()) {
            return s.serialize_none();
        }
        let out: [Option<f64>; 3] = coords.map(|c| c.is_finite().then_some(c));
        out.serialize(s)
    }
}

impl Serialize for Capture {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let fields = if self.start_time.is_some() { 7 } else { 6 };
        let mut st = s.serialize_struct("Capture", fields)?;
        st.serialize_field("version", &FORMAT_VERSION)?;
        st.serialize_field("fps", &self.fps)?;
        st.serialize_field("units", "meters")?;
        st.serialize_field("up_axis", "y")?;
        if let Some(t) = self.start_time {
            st.serialize_field("start_time", &t.to_rfc3339())?;
        }
        st.serialize_field("joints", &self.joints)?;
        st.serialize_field("frames", &FramesOut(self))?;
        st.end()
    }
}

/// Canonical compact serialization; `parse_capture` of the output yields an
/// equal capture.
pub fn serialize_capture(capture: &Capture) -> Vec<u8> {
    serde_json::to_vec(capture).expect("capture serialization is infallible")
}

#[cfg(test)]
mod tests {
    use super::*;

    const JOINTS: &str = r#"["pelvis","left_hip","right_hip","neck","left_hand","right_hand","left_foot","right_foot"]"#;

    fn frame_json(neck: &str) -> String {
        format!(
            "[[0,1,0],[-0.1,0.95,0],[0.1,0.95,0],{neck},[-0.2,0.9,0],[0.2,0.9,0],[-0.1,0.05,0],[0.1,0.05,0]]"
        )
    }

    fn capture_json(frames: &[String], extra: &str) -> String {
        format!(
            r#"{{"version":1,"fps":30.0,"units":"meters","up_axis":"y"{extra},"joints":{JOINTS},"frames":[{}]}}"#,
            frames.join(",")
        )
    }

    #[test]
    fn minimal_two_frame_capture() {
        let json = capture_json(&[frame_json("[0,1.5,0]"), frame_json("[0,1.5,0]")], "");
        let c = parse_capture(json.as_bytes()).unwrap();
        assert_eq!(c.frame_count(), 2);
        assert!(c.validity().iter().all(|&v| v));
        assert_eq!(c.canonical(1, CanonicalJoint::Neck), Vec3::new(0.0, 1.5, 0.0));
    }

    #[test]
    fn null_coordinate_flags_frame() {
        let mut frames: Vec<String> = (0..8).map(|_| frame_json("[0,1.5,0]")).collect();
        frames[5] = frame_json("[0,null,0]");
        let c = parse_capture(capture_json(&frames, "").as_bytes()).unwrap();
        let invalid: Vec<usize> = (0..8).filter(|&i| !c.is_valid(i)).collect();
        assert_eq!(invalid, vec![5]);
    }

    #[test]
    fn unit_and_axis_errors() {
        let json = capture_json(&[frame_json("[0,1.5,0]")], "").replace("meters", "feet");
        assert!(matches!(
            parse_capture(json.as_bytes()),
            Err(IngestError::Unit(_))
        ));
        let json = capture_json(&[frame_json("[0,1.5,0]")], "").replace(r#""up_axis":"y""#, r#""up_axis":"z""#);
        assert!(matches!(
            parse_capture(json.as_bytes()),
            Err(IngestError::Unit(_))
        ));
    }

    #[test]
    fn missing_canonical_joint() {
        let json = capture_json(&[frame_json("[0,1.5,0]")], "").replace("\"neck\"", "\"head\"");
        match parse_capture(json.as_bytes()) {
            Err(IngestError::Joint(j)) => assert_eq!(j, "neck"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn arity_errors_are_schema_errors() {
        let short = "[[0,1,0],[-0.1,0.95,0]]".to_string();
        let json = capture_json(&[short], "");
        assert!(matches!(
            parse_capture(json.as_bytes()),
            Err(IngestError::Schema(_))
        ));
        let bad_triple = frame_json("[0,1.5]");
        assert!(matches!(
            parse_capture(capture_json(&[bad_triple], "").as_bytes()),
            Err(IngestError::Schema(_))
        ));
        let no_fps = capture_json(&[frame_json("[0,1.5,0]")], "").replace(r#""fps":30.0,"#, "");
        assert!(matches!(
            parse_capture(no_fps.as_bytes()),
            Err(IngestError::Schema(_))
        ));
    }

    #[test]
    fn zero_fps_rejected() {
        let json = capture_json(&[frame_json("[0,1.5,0]")], "").replace("30.0", "0");
        assert!(matches!(
            parse_capture(json.as_bytes()),
            Err(IngestError::Schema(_))
        ));
    }

    #[test]
    fn round_trip_preserves_missing_slots_and_start_time() {
        let frames = vec![frame_json("null"), frame_json("[0,null,0.25]")];
        let json = capture_json(&frames, r#","start_time":"2024-03-14T09:00:00+01:00""#);
        let c = parse_capture(json.as_bytes()).unwrap();
        let again = parse_capture(&serialize_capture(&c)).unwrap();
        assert_eq!(c, again);
        assert_eq!(serialize_capture(&c), serialize_capture(&again));
        assert!(!again.is_valid(0) && !again.is_valid(1));
    }
}
