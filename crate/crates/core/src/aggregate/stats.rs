use serde::{Deserialize, Serialize};

use super::AggregateError;
use crate::config::WeightTextThresholds;
use crate::events::{Event, EventId, EventSet};
use crate::kinematics::{BodyVariableSeries, Variable};
use crate::model::{Action, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightText {
    Balanced,
    SlightLeft,
    SlightRight,
    StrongLeft,
    StrongRight,
}

impl WeightText {
    /// Classifies a mean left weight ratio.
    pub fn classify(mean_weight_l: f64, t: &WeightTextThresholds) -> Self {
        let d = mean_weight_l - 0.5;
        let left = d > 0.0;
        match d.abs() {
            x if x <= t.balanced => WeightText::Balanced,
            x if x <= t.slight => {
                if left {
                    WeightText::SlightLeft
                } else {
                    WeightText::SlightRight
                }
            }
            _ if left => WeightText::StrongLeft,
            _ => WeightText::StrongRight,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            WeightText::Balanced => "balanced",
            WeightText::SlightLeft => "slight left",
            WeightText::SlightRight => "slight right",
            WeightText::StrongLeft => "strong left",
            WeightText::StrongRight => "strong right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariableSummary {
    pub variable: Variable,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStats {
    pub event_id: EventId,
    pub duration_s: f64,
    pub valid_frames: usize,
    pub weight_mean_l: Option<f64>,
    pub weight_mean_r: Option<f64>,
    pub weight_text: Option<WeightText>,
    /// Variables with at least one valid frame, in [`Variable::ALL`] order.
    pub variables: Vec<VariableSummary>,
}

pub fn event_stats(
    event: &Event,
    series: &BodyVariableSeries,
    thresholds: &WeightTextThresholds,
) -> Result<EventStats, AggregateError> {
    let end = event.end_frame.min(series.len());
    let range = event.start_frame.min(end)..end;
    let valid_frames = range.clone().filter(|&i| series.is_valid(i)).count();
    if valid_frames == 0 {
        return Err(AggregateError::NoValidFrames);
    }
    let mut variables = Vec::new();
    for var in Variable::ALL {
        let (mut sum, mut n) = (0.0, 0usize);
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in series.values(var)[range.clone()].iter().filter(|v| v.is_finite()) {
            sum += v;
            n += 1;
            min = min.min(v);
            max = max.max(v);
        }
        if n > 0 {
            variables.push(VariableSummary {
                variable: var,
                min,
                mean: sum / n as f64,
                max,
            });
        }
    }
    let mean_of = |var| {
        variables
            .iter()
            .find(|s: &&VariableSummary| s.variable == var)
            .map(|s| s.mean)
    };
    let weight_mean_l = mean_of(Variable::WeightL);
    Ok(EventStats {
        event_id: event.id,
        duration_s: event.duration_s,
        valid_frames,
        weight_mean_l,
        weight_mean_r: mean_of(Variable::WeightR),
        weight_text: weight_mean_l.map(|m| WeightText::classify(m, thresholds)),
        variables,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionTotal {
    pub action: Action,
    pub event_count: usize,
    pub frames: usize,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalStats {
    pub total_frames: usize,
    /// Sum of segment durations.
    pub total_duration_s: f64,
    /// Wall-clock span from the first segment start to the last segment end.
    pub span_s: f64,
    /// Fraction (0..=1) of all frames inside sitting events.
    pub percent_sitting: f64,
    /// One entry per action, in [`Action::ALL`] order, including zeros.
    pub actions: Vec<ActionTotal>,
}

pub fn global_stats(dataset: &Dataset, events: &EventSet) -> GlobalStats {
    let fps_of = |seg: usize| dataset.segments()[seg].capture.fps();
    let actions: Vec<ActionTotal> = Action::ALL
        .into_iter()
        .map(|action| {
            let mut t = ActionTotal {
                action,
                event_count: 0,
                frames: 0,
                total_s: 0.0,
            };
            for e in events.by_action(action) {
                t.event_count += 1;
                t.frames += e.len();
                t.total_s += e.len() as f64 / fps_of(e.segment);
            }
            t
        })
        .collect();
    let total_frames = dataset.total_frames();
    let sitting = actions
        .iter()
        .find(|a| a.action == Action::Sitting)
        .map_or(0, |a| a.frames);
    GlobalStats {
        total_frames,
        total_duration_s: dataset.total_duration_s(),
        span_s: dataset.span_s(),
        percent_sitting: if total_frames == 0 {
            0.0
        } else {
            sitting as f64 / total_frames as f64
        },
        actions,
    }
}
