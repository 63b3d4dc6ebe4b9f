use serde::{Deserialize, Serialize};

use super::{Action, IngestError, ParseMode, FORMAT_VERSION};

/// One labeled occurrence of an action over `[start_frame, end_frame)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionLabel {
    pub action: Action,
    pub start_frame: usize,
    pub end_frame: usize,
}

impl ActionLabel {
    pub fn new(action: Action, start_frame: usize, end_frame: usize) -> Self {
        Self {
            action,
            start_frame,
            end_frame,
        }
    }

    pub fn len(&self) -> usize {
        self.end_frame - self.start_frame
    }

    pub fn is_empty(&self) -> bool {
        self.end_frame <= self.start_frame
    }
}

/// Merged labels plus anything dropped under lenient parsing.
#[derive(Debug, Default)]
pub struct LabelSet {
    pub labels: Vec<ActionLabel>,
    pub warnings: Vec<IngestError>,
}

#[derive(Deserialize)]
struct RawLabels {
    version: u32,
    actions: Vec<RawLabel>,
}

#[derive(Deserialize)]
struct RawLabel {
    action: String,
    start_frame: i64,
    end_frame: i64,
}

#[derive(Serialize)]
struct LabelsOut<'a> {
    version: u32,
    actions: &'a [ActionLabel],
}

/// Parses a labels file against a capture of `frame_count` frames.
///
/// Range problems are always errors. Unknown action names are errors in
/// strict mode and warnings (label dropped) in lenient mode. All problems in
/// the file are reported together.
pub fn parse_labels(
    bytes: &[u8],
    frame_count: usize,
    mode: ParseMode,
) -> Result<LabelSet, IngestError> {
    let raw: RawLabels =
        serde_json::from_slice(bytes).map_err(|e| IngestError::Schema(e.to_string()))?;
    if raw.version != FORMAT_VERSION {
        return Err(IngestError::Schema(format!(
            "unsupported version {}",
            raw.version
        )));
    }
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let mut labels = Vec::with_capacity(raw.actions.len());
    for r in raw.actions {
        let action = match r.action.parse::<Action>() {
            Ok(a) => Some(a),
            Err(e) => {
                match mode {
                    ParseMode::Strict => errors.push(e),
                    ParseMode::Lenient => warnings.push(e),
                }
                None
            }
        };
        let reason = if r.end_frame <= r.start_frame {
            Some("end_frame must exceed start_frame".to_string())
        } else if r.start_frame < 0 {
            Some("start_frame is negative".to_string())
        } else if r.end_frame as u64 > frame_count as u64 {
            Some(format!("exceeds capture length of {frame_count} frames"))
        } else {
            None
        };
        if let Some(reason) = reason {
            errors.push(IngestError::Range {
                action: r.action,
                start: r.start_frame,
                end: r.end_frame,
                reason,
            });
            continue;
        }
        if let Some(action) = action {
            labels.push(ActionLabel::new(
                action,
                r.start_frame as usize,
                r.end_frame as usize,
            ));
        }
    }
    if !errors.is_empty() {
        return Err(IngestError::from_many(errors));
    }
    Ok(LabelSet {
        labels: merge_labels(labels),
        warnings,
    })
}

/// Merges overlapping or touching labels of the same action and sorts the
/// result by `(action, start_frame)`. Labels of different actions are left
/// alone, so they may overlap.
pub fn merge_labels(mut labels: Vec<ActionLabel>) -> Vec<ActionLabel> {
    labels.sort_unstable();
    let mut out: Vec<ActionLabel> = Vec::with_capacity(labels.len());
    for l in labels {
        match out.last_mut() {
            Some(prev) if prev.action == l.action && l.start_frame <= prev.end_frame => {
                prev.end_frame = prev.end_frame.max(l.end_frame);
            }
            _ => out.push(l),
        }
    }
    out
}

pub fn serialize_labels(labels: &[ActionLabel]) -> Vec<u8> {
    serde_json::to_vec(&LabelsOut {
        version: FORMAT_VERSION,
        actions: labels,
    })
    .expect("label serialization is infallible")
}
