use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, FixedOffset};
use serde::{Deserialize, Serialize};

use super::{parse_capture, parse_labels, ActionLabel, Capture, IngestError, ParseMode, FORMAT_VERSION};

/// One entry of a manifest. Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRef {
    pub capture: String,
    pub labels: String,
    pub wall_clock_start: DateTime<FixedOffset>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentManifest {
    pub version: u32,
    pub dataset_id: String,
    pub segments: Vec<SegmentRef>,
}

impl SegmentManifest {
    pub fn new(dataset_id: impl Into<String>, segments: Vec<SegmentRef>) -> Self {
        Self {
            version: FORMAT_VERSION,
            dataset_id: dataset_id.into(),
            segments,
        }
    }
}

pub fn parse_manifest(bytes: &[u8]) -> Result<SegmentManifest, IngestError> {
    let m: SegmentManifest =
        serde_json::from_slice(bytes).map_err(|e| IngestError::Schema(e.to_string()))?;
    if m.version != FORMAT_VERSION {
        return Err(IngestError::Schema(format!(
            "unsupported version {}",
            m.version
        )));
    }
    Ok(m)
}

pub fn serialize_manifest(manifest: &SegmentManifest) -> Vec<u8> {
    serde_json::to_vec_pretty(manifest).expect("manifest serialization is infallible")
}

/// One contiguous capture session.
#[derive(Debug, Clone)]
pub struct Segment {
    pub capture: Capture,
    pub labels: Vec<ActionLabel>,
    pub wall_clock_start: DateTime<FixedOffset>,
    /// Index of this segment's frame 0 in the dataset-wide frame numbering.
    pub frame_offset: usize,
    /// Labels dropped under lenient parsing.
    pub warnings: Vec<String>,
}

impl Segment {
    pub fn wall_clock_end(&self) -> DateTime<FixedOffset> {
        self.wall_clock_at(self.capture.frame_count())
    }

    /// Wall-clock time of a segment-local frame index.
    pub fn wall_clock_at(&self, frame: usize) -> DateTime<FixedOffset> {
        let nanos = (frame as f64 / self.capture.fps() * 1e9).round() as i64;
        self.wall_clock_start + Duration::nanoseconds(nanos)
    }
}

/// An immutable multi-segment dataset with a global frame numbering.
#[derive(Debug, Clone)]
pub struct Dataset {
    dataset_id: String,
    segments: Vec<Segment>,
}

impl Dataset {
    /// Assembles a dataset, checking that segment wall-clock ranges are
    /// ascending and disjoint. `frame_offset` values are recomputed.
    pub fn new(dataset_id: impl Into<String>, mut segments: Vec<Segment>) -> Result<Self, IngestError> {
        let mut offset = 0;
        for s in segments.iter_mut() {
            s.frame_offset = offset;
            offset += s.capture.frame_count();
        }
        for (i, w) in segments.windows(2).enumerate() {
            if w[1].wall_clock_start < w[0].wall_clock_end() {
                return Err(IngestError::Overlap {
                    earlier: i,
                    later: i + 1,
                });
            }
        }
        Ok(Self {
            dataset_id: dataset_id.into(),
            segments,
        })
    }

    pub fn id(&self) -> &str {
        &self.dataset_id
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, index: usize) -> Option<&Segment> {
        self.segments.get(index)
    }

    pub fn total_frames(&self) -> usize {
        self.segments.iter().map(|s| s.capture.frame_count()).sum()
    }

    /// Sum of segment durations; gaps between segments are not counted.
    pub fn total_duration_s(&self) -> f64 {
        self.segments.iter().map(|s| s.capture.duration_s()).sum()
    }

    /// Wall-clock span from the first segment's start to the last one's end.
    pub fn span_s(&self) -> f64 {
        match (self.segments.first(), self.segments.last()) {
            (Some(first), Some(last)) => {
                let d = last.wall_clock_end() - first.wall_clock_start;
                d.num_nanoseconds().unwrap_or(i64::MAX) as f64 * 1e-9
            }
            _ => 0.0,
        }
    }

    pub fn global_frame(&self, segment: usize, frame: usize) -> usize {
        self.segments[segment].frame_offset + frame
    }

    /// Maps a dataset-wide frame index back to `(segment, local frame)`.
    pub fn locate(&self, global: usize) -> Option<(usize, usize)> {
        let idx = self
            .segments
            .partition_point(|s| s.frame_offset + s.capture.frame_count() <= global);
        let seg = self.segments.get(idx)?;
        Some((idx, global - seg.frame_offset))
    }
}

fn read(path: &Path) -> Result<Vec<u8>, IngestError> {
    std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads every segment referenced by the manifest at `manifest_path`.
pub fn load_dataset(manifest_path: &Path, mode: ParseMode) -> Result<Dataset, IngestError> {
    let manifest = parse_manifest(&read(manifest_path)?)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    load_segments(&manifest, base, mode)
}

pub(crate) fn load_segments(
    manifest: &SegmentManifest,
    base: &Path,
    mode: ParseMode,
) -> Result<Dataset, IngestError> {
    let mut segments = Vec::with_capacity(manifest.segments.len());
    for (index, r) in manifest.segments.iter().enumerate() {
        let capture_path: PathBuf = base.join(&r.capture);
        let labels_path: PathBuf = base.join(&r.labels);
        let wrap = |path: &Path, source: IngestError| IngestError::Segment {
            index,
            path: path.to_path_buf(),
            source: Box::new(source),
        };
        let capture = read(&capture_path)
            .and_then(|b| parse_capture(&b))
            .map_err(|e| wrap(&capture_path, e))?;
        let label_set = read(&labels_path)
            .and_then(|b| parse_labels(&b, capture.frame_count(), mode))
            .map_err(|e| wrap(&labels_path, e))?;
        segments.push(Segment {
            capture,
            labels: label_set.labels,
            wall_clock_start: r.wall_clock_start,
            frame_offset: 0,
            warnings: label_set.warnings.iter().map(ToString::to_string).collect(),
        });
    }
    Dataset::new(manifest.dataset_id.clone(), segments)
}
