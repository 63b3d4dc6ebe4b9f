use serde::{Deserialize, Serialize};

use super::{Event, EventId, EventSet};
use crate::config::FreezeConfig;
use crate::kinematics::{BodyVariableSeries, Variable};
use crate::model::Action;

/// A stretch of a walking event during which both feet stayed under the
/// pelvis for at least the minimum freeze duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreezeInterval {
    pub parent_event_id: EventId,
    pub segment: usize,
    pub start_frame: usize,
    pub end_frame: usize,
    pub duration_s: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum FootState {
    Pinned,
    Free,
    Gap,
}

fn foot_state(series: &BodyVariableSeries, i: usize, threshold: f64) -> FootState {
    match (
        series.value(Variable::FootL, i),
        series.value(Variable::FootR, i),
    ) {
        (Some(l), Some(r)) if l.abs() < threshold && r.abs() < threshold => FootState::Pinned,
        (Some(_), Some(_)) => FootState::Free,
        _ => FootState::Gap,
    }
}

/// Scans one event for freeze candidates. Non-walking events never yield
/// any. Runs of at most `max_gap_frames` invalid frames between pinned frames
/// are bridged; a longer gap or any frame with a foot out front or behind
/// ends the run. Intervals start and end on pinned frames.
pub fn detect_freezes(
    series: &BodyVariableSeries,
    event: &Event,
    cfg: &FreezeConfig,
) -> Vec<FreezeInterval> {
    let mut out = Vec::new();
    if event.action != Action::Walking {
        return out;
    }
    let fps = series.fps();
    let mut emit = |start: usize, end: usize| {
        let duration_s = (end - start) as f64 / fps;
        if duration_s >= cfg.min_freeze_s {
            out.push(FreezeInterval {
                parent_event_id: event.id,
                segment: event.segment,
                start_frame: start,
                end_frame: end,
                duration_s,
            });
        }
    };

    let end = event.end_frame.min(series.len());
    let mut run: Option<(usize, usize)> = None; // (first pinned, last pinned)
    let mut gap = 0usize;
    for i in event.start_frame..end {
        match foot_state(series, i, cfg.feet_threshold_m) {
            FootState::Pinned => {
                run = Some(match run {
                    Some((s, _)) => (s, i),
                    None => (i, i),
                });
                gap = 0;
            }
            FootState::Gap => {
                if run.is_some() {
                    gap += 1;
                    if gap > cfg.max_gap_frames {
                        let (s, l) = run.take().unwrap();
                        emit(s, l + 1);
                        gap = 0;
                    }
                }
            }
            FootState::Free => {
                if let Some((s, l)) = run.take() {
                    emit(s, l + 1);
                }
                gap = 0;
            }
        }
    }
    if let Some((s, l)) = run {
        emit(s, l + 1);
    }
    out
}

/// Freeze candidates over every walking event, in event order. `series` is
/// indexed by segment.
pub fn detect_all_freezes(
    series: &[BodyVariableSeries],
    events: &EventSet,
    cfg: &FreezeConfig,
) -> Vec<FreezeInterval> {
    events
        .by_action(Action::Walking)
        .flat_map(|e| detect_freezes(&series[e.segment], e, cfg))
        .collect()
}
