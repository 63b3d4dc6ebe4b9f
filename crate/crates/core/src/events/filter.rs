use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Event, EventId, EventSet, FreezeInterval};
use crate::config::FilterDefaults;
use crate::kinematics::{BodyVariableSeries, Variable};
use crate::numeric::{mean, percentile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FilterError {
    #[error("unknown filter `{0}`")]
    UnknownFilter(String),
    #[error("invalid parameter for filter `{kind}`: {reason}")]
    InvalidParam { kind: String, reason: String },
}

/// One event predicate. A filter list is a conjunction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterSpec {
    /// Event lasts strictly longer than `seconds`.
    MinDuration { seconds: f64 },
    /// The given percentile of trunk angle over the event exceeds `degrees`.
    HighTrunk { degrees: f64, percentile: f64 },
    /// Larger mean arm use over the smaller (floored at `floor_m`) exceeds
    /// `ratio`.
    ImbalancedArm { ratio: f64, floor_m: f64 },
    /// Mean left weight ratio deviates from 0.5 by more than `deviation`.
    ImbalancedWeight { deviation: f64 },
    /// Event contains at least one freeze candidate.
    PotentialFreezes,
}

impl FilterSpec {
    pub const KINDS: [&'static str; 5] = [
        "min_duration",
        "high_trunk",
        "imbalanced_arm",
        "imbalanced_weight",
        "potential_freezes",
    ];

    pub fn kind(&self) -> &'static str {
        match self {
            FilterSpec::MinDuration { .. } => "min_duration",
            FilterSpec::HighTrunk { .. } => "high_trunk",
            FilterSpec::ImbalancedArm { .. } => "imbalanced_arm",
            FilterSpec::ImbalancedWeight { .. } => "imbalanced_weight",
            FilterSpec::PotentialFreezes => "potential_freezes",
        }
    }

    /// The filter of a given kind with every parameter at its default.
    pub fn default_for(kind: &str, d: &FilterDefaults) -> Result<FilterSpec, FilterError> {
        Ok(match kind {
            "min_duration" => FilterSpec::MinDuration {
                seconds: d.min_duration_s,
            },
            "high_trunk" => FilterSpec::HighTrunk {
                degrees: d.high_trunk_deg,
                percentile: d.high_trunk_percentile,
            },
            "imbalanced_arm" => FilterSpec::ImbalancedArm {
                ratio: d.arm_ratio,
                floor_m: d.arm_floor_m,
            },
            "imbalanced_weight" => FilterSpec::ImbalancedWeight {
                deviation: d.weight_deviation,
            },
            "potential_freezes" => FilterSpec::PotentialFreezes,
            other => return Err(FilterError::UnknownFilter(other.to_string())),
        })
    }

    /// Parses `kind` or `kind=value`, where the value overrides the filter's
    /// primary threshold.
    pub fn parse(s: &str, defaults: &FilterDefaults) -> Result<FilterSpec, FilterError> {
        let (kind, value) = match s.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim())),
            None => (s.trim(), None),
        };
        let mut spec = Self::default_for(kind, defaults)?;
        let Some(value) = value else {
            return Ok(spec);
        };
        let invalid = |reason: String| FilterError::InvalidParam {
            kind: kind.to_string(),
            reason,
        };
        let x: f64 = value
            .parse()
            .map_err(|_| invalid(format!("`{value}` is not a number")))?;
        if !x.is_finite() {
            return Err(invalid(format!("`{value}` is not finite")));
        }
        match &mut spec {
            FilterSpec::MinDuration { seconds } if x >= 0.0 => *seconds = x,
            FilterSpec::HighTrunk { degrees, .. } if (0.0..=180.0).contains(&x) => *degrees = x,
            FilterSpec::ImbalancedArm { ratio, .. } if x >= 1.0 => *ratio = x,
            FilterSpec::ImbalancedWeight { deviation } if (0.0..0.5).contains(&x) => {
                *deviation = x
            }
            FilterSpec::PotentialFreezes => {
                return Err(invalid("takes no parameter".to_string()))
            }
            _ => return Err(invalid(format!("{x} is out of range"))),
        }
        Ok(spec)
    }
}

impl fmt::Display for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterSpec::MinDuration { seconds } => write!(f, "min_duration={seconds}"),
            FilterSpec::HighTrunk { degrees, .. } => write!(f, "high_trunk={degrees}"),
            FilterSpec::ImbalancedArm { ratio, .. } => write!(f, "imbalanced_arm={ratio}"),
            FilterSpec::ImbalancedWeight { deviation } => write!(f, "imbalanced_weight={deviation}"),
            FilterSpec::PotentialFreezes => f.write_str("potential_freezes"),
        }
    }
}

/// Everything a filter may need besides the event itself.
pub struct FilterContext<'a> {
    /// Body variables per segment.
    pub series: &'a [BodyVariableSeries],
    freezing: HashSet<EventId>,
}

impl<'a> FilterContext<'a> {
    pub fn new(series: &'a [BodyVariableSeries], freezes: &[FreezeInterval]) -> Self {
        Self {
            series,
            freezing: freezes.iter().map(|f| f.parent_event_id).collect(),
        }
    }
}

fn event_values<'s>(
    series: &'s BodyVariableSeries,
    event: &Event,
    var: Variable,
) -> impl Iterator<Item = f64> + 's {
    let end = event.end_frame.min(series.len());
    series.values(var)[event.start_frame.min(end)..end]
        .iter()
        .copied()
        .filter(|v| v.is_finite())
}

/// Whether a single event passes a single filter. Variable-based filters
/// reject events without any valid frame.
pub fn event_matches(event: &Event, ctx: &FilterContext<'_>, filter: &FilterSpec) -> bool {
    let series = &ctx.series[event.segment];
    match *filter {
        FilterSpec::MinDuration { seconds } => event.duration_s > seconds,
        FilterSpec::HighTrunk {
            degrees,
            percentile: p,
        } => percentile(event_values(series, event, Variable::Trunk), p)
            .is_some_and(|v| v > degrees),
        FilterSpec::ImbalancedArm { ratio, floor_m } => {
            let l = mean(event_values(series, event, Variable::ArmL));
            let r = mean(event_values(series, event, Variable::ArmR));
            match (l, r) {
                (Some(l), Some(r)) => l.max(r) / l.min(r).max(floor_m) > ratio,
                _ => false,
            }
        }
        FilterSpec::ImbalancedWeight { deviation } => {
            mean(event_values(series, event, Variable::WeightL))
                .is_some_and(|m| (m - 0.5).abs() > deviation)
        }
        FilterSpec::PotentialFreezes => ctx.freezing.contains(&event.id),
    }
}

/// Keeps the events that pass every filter, preserving order.
pub fn apply_filters(events: &EventSet, ctx: &FilterContext<'_>, filters: &[FilterSpec]) -> EventSet {
    EventSet {
        events: events
            .iter()
            .filter(|e| filters.iter().all(|f| event_matches(e, ctx, f)))
            .copied()
            .collect(),
    }
}
