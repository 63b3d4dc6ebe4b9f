//! Events (labeled action occurrences), freeze candidates and the event
//! filters used by the dashboard.

mod filter;
mod freeze;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::model::{Action, Dataset};

pub use filter::{apply_filters, event_matches, FilterContext, FilterError, FilterSpec};
pub use freeze::{detect_all_freezes, detect_freezes, FreezeInterval};

/// Stable event identifier: `{action}-{segment}-{start_frame}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId {
    pub action: Action,
    pub segment: usize,
    pub start_frame: usize,
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.action, self.segment, self.start_frame)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed event id `{0}`")]
pub struct BadEventId(pub String);

impl FromStr for EventId {
    type Err = BadEventId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BadEventId(s.to_string());
        let mut parts = s.rsplitn(3, '-');
        let start_frame = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let segment = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let action = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        Ok(EventId {
            action,
            segment,
            start_frame,
        })
    }
}

impl Serialize for EventId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EventId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub id: EventId,
    pub action: Action,
    pub segment: usize,
    pub start_frame: usize,
    pub end_frame: usize,
    pub duration_s: f64,
}

impl Event {
    pub fn frames(&self) -> std::ops::Range<usize> {
        self.start_frame..self.end_frame
    }

    pub fn len(&self) -> usize {
        self.end_frame - self.start_frame
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Events ordered by `(action, segment, start_frame)`, which groups them per
/// action for stacked rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventSet {
    events: Vec<Event>,
}

impl EventSet {
    pub fn from_events(mut events: Vec<Event>) -> Self {
        events.sort_by_key(|e| e.id);
        Self { events }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Event> {
        self.events.iter()
    }

    pub fn by_action(&self, action: Action) -> impl Iterator<Item = &Event> + '_ {
        let lo = self.events.partition_point(|e| e.action < action);
        self.events[lo..].iter().take_while(move |e| e.action == action)
    }

    pub fn only_action(&self, action: Action) -> EventSet {
        EventSet {
            events: self.by_action(action).copied().collect(),
        }
    }

    pub fn get(&self, id: &EventId) -> Option<&Event> {
        self.events
            .binary_search_by(|e| e.id.cmp(id))
            .ok()
            .map(|i| &self.events[i])
    }

    pub fn contains(&self, id: &EventId) -> bool {
        self.get(id).is_some()
    }

    /// Events in time order: `(segment, start_frame, action)`.
    pub fn chronological(&self) -> Vec<&Event> {
        let mut v: Vec<&Event> = self.events.iter().collect();
        v.sort_by_key(|e| (e.segment, e.start_frame, e.action));
        v
    }

    pub fn ids(&self) -> Vec<EventId> {
        self.events.iter().map(|e| e.id).collect()
    }
}

impl<'a> IntoIterator for &'a EventSet {
    type Item = &'a Event;
    type IntoIter = std::slice::Iter<'a, Event>;

    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}

/// One event per merged label.
pub fn extract_events(dataset: &Dataset) -> EventSet {
    let mut events = Vec::new();
    for (segment, seg) in dataset.segments().iter().enumerate() {
        let fps = seg.capture.fps();
        for l in &seg.labels {
            events.push(Event {
                id: EventId {
                    action: l.action,
                    segment,
                    start_frame: l.start_frame,
                },
                action: l.action,
                segment,
                start_frame: l.start_frame,
                end_frame: l.end_frame,
                duration_s: (l.end_frame - l.start_frame) as f64 / fps,
            });
        }
    }
    EventSet::from_events(events)
}
