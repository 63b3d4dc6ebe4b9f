//! Canonical data model: captures, action labels, segment manifests and
//! loaded datasets.
//!
//! All frame intervals are half-open: `[start_frame, end_frame)`.

mod capture;
mod dataset;
mod labels;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use capture::{parse_capture, serialize_capture, Capture};
pub use dataset::{
    load_dataset, parse_manifest, serialize_manifest, Dataset, Segment, SegmentManifest, SegmentRef,
};
pub use labels::{merge_labels, parse_labels, serialize_labels, ActionLabel, LabelSet};

/// File format version written and accepted by this crate.
pub const FORMAT_VERSION: u32 = 1;

/// The seven key actions tracked per capture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    SitToStand,
    Sitting,
    StandToSit,
    Reaching,
    Walking,
    Standing,
    TakingMedicine,
}

impl Action {
    pub const ALL: [Action; 7] = [
        Action::SitToStand,
        Action::Sitting,
        Action::StandToSit,
        Action::Reaching,
        Action::Walking,
        Action::Standing,
        Action::TakingMedicine,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Action::SitToStand => "sit_to_stand",
            Action::Sitting => "sitting",
            Action::StandToSit => "stand_to_sit",
            Action::Reaching => "reaching",
            Action::Walking => "walking",
            Action::Standing => "standing",
            Action::TakingMedicine => "taking_medicine",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Action::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| IngestError::Vocabulary(s.to_string()))
    }
}

/// Joints every capture must carry for the body variables to be computable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CanonicalJoint {
    Pelvis,
    LeftHip,
    RightHip,
    Neck,
    LeftHand,
    RightHand,
    LeftFoot,
    RightFoot,
}

impl CanonicalJoint {
    pub const ALL: [CanonicalJoint; 8] = [
        CanonicalJoint::Pelvis,
        CanonicalJoint::LeftHip,
        CanonicalJoint::RightHip,
        CanonicalJoint::Neck,
        CanonicalJoint::LeftHand,
        CanonicalJoint::RightHand,
        CanonicalJoint::LeftFoot,
        CanonicalJoint::RightFoot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CanonicalJoint::Pelvis => "pelvis",
            CanonicalJoint::LeftHip => "left_hip",
            CanonicalJoint::RightHip => "right_hip",
            CanonicalJoint::Neck => "neck",
            CanonicalJoint::LeftHand => "left_hand",
            CanonicalJoint::RightHand => "right_hand",
            CanonicalJoint::LeftFoot => "left_foot",
            CanonicalJoint::RightFoot => "right_foot",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// Strict parsing rejects unknown action names; lenient parsing drops the
/// offending label and reports it as a warning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unit error: {0}")]
    Unit(String),
    #[error("joint error: missing canonical joint `{0}`")]
    Joint(String),
    #[error("range error: {action} [{start}, {end}) {reason}")]
    Range {
        action: String,
        start: i64,
        end: i64,
        reason: String,
    },
    #[error("vocabulary error: unknown action `{0}`")]
    Vocabulary(String),
    #[error("overlap error: segment {later} starts before segment {earlier} ends")]
    Overlap { earlier: usize, later: usize },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("segment {index} ({}): {source}", path.display())]
    Segment {
        index: usize,
        path: PathBuf,
        #[source]
        source: Box<IngestError>,
    },
    #[error("{} problems found", .0.len())]
    Multiple(Vec<IngestError>),
}

impl IngestError {
    /// Machine-readable error kind.
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::Schema(_) => "schema_error",
            IngestError::Unit(_) => "unit_error",
            IngestError::Joint(_) => "joint_error",
            IngestError::Range { .. } => "range_error",
            IngestError::Vocabulary(_) => "vocabulary_error",
            IngestError::Overlap { .. } => "overlap_error",
            IngestError::Io { .. } => "io_error",
            IngestError::Segment { source, .. } => source.code(),
            IngestError::Multiple(_) => "multiple_errors",
        }
    }

    /// Flattens nested and aggregated errors into individual diagnostics,
    /// each prefixed with its segment context.
    pub fn diagnostics(&self) -> Vec<(String, &'static str, String)> {
        let mut out = Vec::new();
        self.collect_diagnostics(String::new(), &mut out);
        out
    }

    fn collect_diagnostics(&self, ctx: String, out: &mut Vec<(String, &'static str, String)>) {
        match self {
            IngestError::Multiple(all) => {
                for e in all {
                    e.collect_diagnostics(ctx.clone(), out);
                }
            }
            IngestError::Segment {
                index,
                path,
                source,
            } => source.collect_diagnostics(format!("segment {index} ({})", path.display()), out),
            other => out.push((ctx, other.code(), other.to_string())),
        }
    }

    /// True when the error stems from the filesystem rather than content.
    pub fn is_io(&self) -> bool {
        match self {
            IngestError::Io { .. } => true,
            IngestError::Segment { source, .. } => source.is_io(),
            IngestError::Multiple(all) => all.iter().any(IngestError::is_io),
            _ => false,
        }
    }

    pub(crate) fn from_many(mut errors: Vec<IngestError>) -> IngestError {
        if errors.len() == 1 {
            errors.pop().unwrap()
        } else {
            IngestError::Multiple(errors)
        }
    }
}
