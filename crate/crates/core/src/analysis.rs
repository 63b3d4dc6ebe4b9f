//! A loaded dataset with its derived series, events and freeze candidates,
//! plus the payload builders shared by the HTTP service and the batch
//! report. Payloads are plain serializable structs; building one performs
//! only pure library calls on immutable state.

use serde::Serialize;
use thiserror::Error;

use crate::aggregate::{
    self, downsample, event_stats, global_stats, simplify, ActionTotal, BinnedSeries,
    Distribution, DownsamplePoint, EventStats, GlobalStats, Scope, ScopeStats,
};
use crate::config::Config;
use crate::events::{
    apply_filters, detect_all_freezes, extract_events, Event, EventId, EventSet, FilterContext,
    FilterSpec, FreezeInterval,
};
use crate::geometry::Vec3;
use crate::kinematics::{compute_series, BodyPose, BodyVariableSeries, Variable};
use crate::model::{Action, Dataset};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    BadRequest(String),
}

impl QueryError {
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::NotFound(_) => "not_found",
            QueryError::BadRequest(_) => "bad_request",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    dataset: Dataset,
    config: Config,
    series: Vec<BodyVariableSeries>,
    events: EventSet,
    freezes: Vec<FreezeInterval>,
    /// Whole-dataset mean and sigma per variable, in `Variable::ALL` order.
    global_scope: [Option<ScopeStats>; 7],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentMeta {
    pub index: usize,
    pub fps: f64,
    pub frame_count: usize,
    pub frame_offset: usize,
    pub duration_s: f64,
    pub wall_clock_start: String,
    pub wall_clock_end: String,
    pub gap_frames: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub dataset_id: String,
    pub fps: f64,
    pub total_frames: usize,
    pub total_duration_s: f64,
    pub span_s: f64,
    pub joints: Vec<String>,
    pub variables: Vec<Variable>,
    pub segments: Vec<SegmentMeta>,
    pub config: Config,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineEntry {
    pub id: EventId,
    pub action: Action,
    pub segment: usize,
    pub start_frame: usize,
    pub end_frame: usize,
    pub start_time: String,
    pub end_time: String,
    pub duration_s: f64,
    /// Stacked row; simultaneous events never share one.
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventList {
    pub action: Option<Action>,
    pub filters: Vec<FilterSpec>,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, Default)]
pub struct SeriesRequest {
    pub variables: Vec<Variable>,
    pub simplify: bool,
    pub max_points: Option<usize>,
    pub scope: Option<Scope>,
    /// Narrows the selection that defines the `selection` scope.
    pub filters: Vec<FilterSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariableTrack {
    Binned {
        variable: Variable,
        unit: &'static str,
        series: BinnedSeries,
    },
    Downsampled {
        variable: Variable,
        unit: &'static str,
        points: Vec<DownsamplePoint>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPayload {
    pub event_id: EventId,
    pub segment: usize,
    pub start_frame: usize,
    pub end_frame: usize,
    pub fps: f64,
    pub simplified: bool,
    pub tracks: Vec<VariableTrack>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Arrow {
    pub variable: Variable,
    pub origin_joint: &'static str,
    pub origin: [f64; 3],
    /// Unit vector; magnitude carries the variable's value.
    pub direction: [f64; 3],
    pub magnitude: f64,
    pub unit: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayFrame {
    pub frame: usize,
    pub valid: bool,
    pub positions: Vec<Option<[f64; 3]>>,
    pub arrows: Vec<Arrow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FramesPayload {
    pub event_id: EventId,
    pub segment: usize,
    pub fps: f64,
    pub from: usize,
    pub to: usize,
    pub stride: usize,
    pub joints: Vec<String>,
    pub frames: Vec<ReplayFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventReport {
    pub event: Event,
    pub stats: Option<EventStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterHits {
    pub filter: String,
    pub action: Action,
    pub events: Vec<EventId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub dataset_id: String,
    pub config: Config,
    pub global: GlobalStats,
    pub actions: Vec<ActionTotal>,
    pub events: Vec<EventReport>,
    pub freezes: Vec<FreezeInterval>,
    /// Each filter at its default parameters, per action with events.
    pub filter_hits: Vec<FilterHits>,
    /// Result of the caller's own filter list, when one was given.
    pub selection: Option<EventList>,
}

fn rfc3339(t: chrono::DateTime<chrono::FixedOffset>) -> String {
    t.to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl Analysis {
    /// Computes body variables, events and freeze candidates up front.
    pub fn new(dataset: Dataset, config: Config) -> Self {
        let series: Vec<BodyVariableSeries> = dataset
            .segments()
            .iter()
            .map(|s| compute_series(&s.capture, &config.kinematics))
            .collect();
        let events = extract_events(&dataset);
        let freezes = detect_all_freezes(&series, &events, &config.freeze);
        let global_scope = Variable::ALL.map(|v| {
            ScopeStats::from_values(series.iter().flat_map(|s| s.values(v).iter().copied()))
        });
        Self {
            dataset,
            config,
            series,
            events,
            freezes,
            global_scope,
        }
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn series(&self) -> &[BodyVariableSeries] {
        &self.series
    }

    pub fn events(&self) -> &EventSet {
        &self.events
    }

    pub fn all_freezes(&self) -> &[FreezeInterval] {
        &self.freezes
    }

    pub fn filter_context(&self) -> FilterContext<'_> {
        FilterContext::new(&self.series, &self.freezes)
    }

    pub fn meta(&self) -> Meta {
        let segs = self.dataset.segments();
        Meta {
            dataset_id: self.dataset.id().to_string(),
            fps: segs.first().map_or(0.0, |s| s.capture.fps()),
            total_frames: self.dataset.total_frames(),
            total_duration_s: self.dataset.total_duration_s(),
            span_s: self.dataset.span_s(),
            joints: segs
                .first()
                .map(|s| s.capture.joints().to_vec())
                .unwrap_or_default(),
            variables: Variable::ALL.to_vec(),
            segments: segs
                .iter()
                .enumerate()
                .map(|(i, s)| SegmentMeta {
                    index: i,
                    fps: s.capture.fps(),
                    frame_count: s.capture.frame_count(),
                    frame_offset: s.frame_offset,
                    duration_s: s.capture.duration_s(),
                    wall_clock_start: rfc3339(s.wall_clock_start),
                    wall_clock_end: rfc3339(s.wall_clock_end()),
                    gap_frames: self.series[i].gap_count(),
                    warnings: s.warnings.clone(),
                })
                .collect(),
            config: self.config.clone(),
        }
    }

    pub fn global_stats(&self) -> GlobalStats {
        global_stats(&self.dataset, &self.events)
    }

    pub fn action_summary(&self) -> Vec<ActionTotal> {
        self.global_stats().actions
    }

    pub fn timeline(&self) -> Vec<TimelineEntry> {
        let mut row_ends: Vec<usize> = Vec::new();
        self.events
            .chronological()
            .into_iter()
            .map(|e| {
                let seg = &self.dataset.segments()[e.segment];
                let gs = self.dataset.global_frame(e.segment, e.start_frame);
                let ge = self.dataset.global_frame(e.segment, e.end_frame);
                let row = match row_ends.iter().position(|&end| end <= gs) {
                    Some(r) => {
                        row_ends[r] = ge;
                        r
                    }
                    None => {
                        row_ends.push(ge);
                        row_ends.len() - 1
                    }
                };
                TimelineEntry {
                    id: e.id,
                    action: e.action,
                    segment: e.segment,
                    start_frame: e.start_frame,
                    end_frame: e.end_frame,
                    start_time: rfc3339(seg.wall_clock_at(e.start_frame)),
                    end_time: rfc3339(seg.wall_clock_at(e.end_frame)),
                    duration_s: e.duration_s,
                    row,
                }
            })
            .collect()
    }

    /// Parses `kind[=value]` filter strings against the configured defaults.
    pub fn parse_filters<S: AsRef<str>>(&self, raw: &[S]) -> Result<Vec<FilterSpec>, QueryError> {
        raw.iter()
            .map(|s| {
                FilterSpec::parse(s.as_ref(), &self.config.filters)
                    .map_err(|e| QueryError::BadRequest(e.to_string()))
            })
            .collect()
    }

    pub fn filtered_events(&self, action: Option<Action>, filters: &[FilterSpec]) -> EventSet {
        let base = match action {
            Some(a) => self.events.only_action(a),
            None => self.events.clone(),
        };
        apply_filters(&base, &self.filter_context(), filters)
    }

    pub fn event_list(&self, action: Option<Action>, filters: &[FilterSpec]) -> EventList {
        EventList {
            action,
            filters: filters.to_vec(),
            events: self.filtered_events(action, filters).events().to_vec(),
        }
    }

    pub fn event(&self, id: &str) -> Result<&Event, QueryError> {
        let not_found = || QueryError::NotFound(format!("no event `{id}`"));
        let parsed: EventId = id.parse().map_err(|_| not_found())?;
        self.events.get(&parsed).ok_or_else(not_found)
    }

    fn values_in<'a>(
        &'a self,
        events: impl IntoIterator<Item = &'a Event> + 'a,
        var: Variable,
    ) -> impl Iterator<Item = f64> + 'a {
        events.into_iter().flat_map(move |e| {
            self.series[e.segment].values(var)[e.frames()]
                .iter()
                .copied()
                .filter(|v| v.is_finite())
        })
    }

    fn scope_stats(
        &self,
        event: &Event,
        var: Variable,
        scope: Scope,
        filters: &[FilterSpec],
    ) -> Option<ScopeStats> {
        match scope {
            Scope::Global => {
                let k = Variable::ALL.iter().position(|v| *v == var)?;
                self.global_scope[k]
            }
            Scope::Selection => {
                let selected = self.filtered_events(Some(event.action), filters);
                ScopeStats::from_values(self.values_in(selected.events(), var))
                    .or_else(|| ScopeStats::from_values(self.values_in([event], var)))
            }
        }
    }

    pub fn event_series(&self, id: &str, req: &SeriesRequest) -> Result<SeriesPayload, QueryError> {
        let event = *self.event(id)?;
        let series = &self.series[event.segment];
        let max_points = req.max_points.unwrap_or(self.config.query.max_points);
        let scope = req.scope.unwrap_or(self.config.query.simplify_scope);
        let variables = if req.variables.is_empty() {
            Variable::ALL.to_vec()
        } else {
            req.variables.clone()
        };
        let mut tracks = Vec::with_capacity(variables.len());
        for var in variables {
            let slice = &series.values(var)[event.frames()];
            let track = if req.simplify {
                match self.scope_stats(&event, var, scope, &req.filters) {
                    Some(stats) => VariableTrack::Binned {
                        variable: var,
                        unit: var.unit(),
                        series: simplify(var, slice, event.start_frame, scope, stats)
                            .map_err(|e| QueryError::BadRequest(e.to_string()))?,
                    },
                    // No valid frame anywhere in scope: nothing to bin.
                    None => VariableTrack::Binned {
                        variable: var,
                        unit: var.unit(),
                        series: BinnedSeries {
                            variable: var,
                            scope,
                            mean: 0.0,
                            sigma: 0.0,
                            bins: Vec::new(),
                        },
                    },
                }
            } else {
                VariableTrack::Downsampled {
                    variable: var,
                    unit: var.unit(),
                    points: downsample(slice, event.start_frame, max_points)
                        .map_err(|e| QueryError::BadRequest(e.to_string()))?,
                }
            };
            tracks.push(track);
        }
        Ok(SeriesPayload {
            event_id: event.id,
            segment: event.segment,
            start_frame: event.start_frame,
            end_frame: event.end_frame,
            fps: series.fps(),
            simplified: req.simplify,
            tracks,
        })
    }

    pub fn event_stats(&self, id: &str) -> Result<EventStats, QueryError> {
        let event = self.event(id)?;
        event_stats(event, &self.series[event.segment], &self.config.weight_text)
            .map_err(|e| QueryError::BadRequest(e.to_string()))
    }

    /// Legend distributions; sided variables come back as a left/right pair
    /// over a shared range. Scope is the given action's events, or the whole
    /// dataset.
    pub fn distributions(
        &self,
        variables: &[Variable],
        action: Option<Action>,
    ) -> Result<Vec<Distribution>, QueryError> {
        let scope: Vec<Event> = match action {
            Some(a) => self.events.by_action(a).copied().collect(),
            None => self
                .dataset
                .segments()
                .iter()
                .enumerate()
                .map(|(i, s)| Event {
                    id: EventId {
                        action: Action::Standing,
                        segment: i,
                        start_frame: 0,
                    },
                    action: Action::Standing,
                    segment: i,
                    start_frame: 0,
                    end_frame: s.capture.frame_count(),
                    duration_s: s.capture.duration_s(),
                })
                .collect(),
        };
        let mut wanted: Vec<Variable> = Vec::new();
        for &v in variables {
            let key = v.pair().map_or(v, |(l, _)| l);
            if !wanted.contains(&key) {
                wanted.push(key);
            }
        }
        let empty = |_| QueryError::BadRequest("no valid frames in scope".into());
        let mut out = Vec::new();
        for v in wanted {
            match v.pair() {
                Some((l, r)) => {
                    let (dl, dr) = aggregate::paired_distribution(
                        l,
                        r,
                        self.values_in(&scope, l),
                        self.values_in(&scope, r),
                    )
                    .map_err(empty)?;
                    out.push(dl);
                    out.push(dr);
                }
                None => out.push(aggregate::distribution(v, self.values_in(&scope, v)).map_err(empty)?),
            }
        }
        Ok(out)
    }

    /// Joint positions and body-variable arrows for replay. `from`/`to` are
    /// segment-local frames clamped to the event.
    pub fn frames(
        &self,
        id: &str,
        from: Option<usize>,
        to: Option<usize>,
        stride: Option<usize>,
    ) -> Result<FramesPayload, QueryError> {
        let event = *self.event(id)?;
        let stride = stride.unwrap_or(1);
        if stride == 0 {
            return Err(QueryError::BadRequest("stride must be >= 1".into()));
        }
        let from = from.unwrap_or(event.start_frame).max(event.start_frame);
        let to = to.unwrap_or(event.end_frame).min(event.end_frame);
        if from >= to {
            return Err(QueryError::BadRequest(format!(
                "empty frame range [{from}, {to}) within event [{}, {})",
                event.start_frame, event.end_frame
            )));
        }
        let seg = &self.dataset.segments()[event.segment];
        let capture = &seg.capture;
        let series = &self.series[event.segment];
        let frames = (from..to)
            .step_by(stride)
            .map(|i| ReplayFrame {
                frame: i,
                valid: series.is_valid(i),
                positions: capture
                    .frame(i)
                    .iter()
                    .map(|p| p.is_finite().then(|| p.to_array()))
                    .collect(),
                arrows: if capture.is_valid(i) {
                    self.arrows(series, &BodyPose::from_capture(capture, i), i)
                } else {
                    Vec::new()
                },
            })
            .collect();
        Ok(FramesPayload {
            event_id: event.id,
            segment: event.segment,
            fps: capture.fps(),
            from,
            to,
            stride,
            joints: capture.joints().to_vec(),
            frames,
        })
    }

    fn arrows(&self, series: &BodyVariableSeries, pose: &BodyPose, i: usize) -> Vec<Arrow> {
        let Some(frame) = series.local_frame(i) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut push = |variable: Variable, origin_joint, origin: Vec3, direction: Vec3| {
            if let Some(v) = series.value(variable, i) {
                out.push(Arrow {
                    variable,
                    origin_joint,
                    origin: origin.to_array(),
                    direction: direction.to_array(),
                    magnitude: v.abs(),
                    unit: variable.unit(),
                });
            }
        };
        let trunk = pose.neck - pose.pelvis;
        let n = trunk.norm();
        if n > 0.0 {
            push(Variable::Trunk, "pelvis", pose.pelvis, trunk * (1.0 / n));
        }
        let sagittal = |p: Vec3| {
            if (p - pose.pelvis).dot(frame.z_hat) < 0.0 {
                -frame.z_hat
            } else {
                frame.z_hat
            }
        };
        push(Variable::ArmL, "left_hand", pose.left_hand, sagittal(pose.left_hand));
        push(Variable::ArmR, "right_hand", pose.right_hand, sagittal(pose.right_hand));
        push(Variable::FootL, "left_foot", pose.left_foot, sagittal(pose.left_foot));
        push(Variable::FootR, "right_foot", pose.right_foot, sagittal(pose.right_foot));
        push(Variable::WeightL, "pelvis", pose.pelvis, -frame.x_hat);
        push(Variable::WeightR, "pelvis", pose.pelvis, frame.x_hat);
        out
    }

    pub fn freezes(&self, event: Option<&str>) -> Result<Vec<FreezeInterval>, QueryError> {
        match event {
            None => Ok(self.freezes.clone()),
            Some(id) => {
                let e = self.event(id)?;
                Ok(self
                    .freezes
                    .iter()
                    .filter(|f| f.parent_event_id == e.id)
                    .copied()
                    .collect())
            }
        }
    }

    pub fn report(&self, selection: Option<&[FilterSpec]>) -> Report {
        let global = self.global_stats();
        let ctx = self.filter_context();
        let mut filter_hits = Vec::new();
        for kind in FilterSpec::KINDS {
            let spec = FilterSpec::default_for(kind, &self.config.filters)
                .expect("built-in filter kinds parse");
            for action in Action::ALL {
                let scoped = self.events.only_action(action);
                if scoped.is_empty() {
                    continue;
                }
                filter_hits.push(FilterHits {
                    filter: spec.to_string(),
                    action,
                    events: apply_filters(&scoped, &ctx, &[spec]).ids(),
                });
            }
        }
        Report {
            dataset_id: self.dataset.id().to_string(),
            config: self.config.clone(),
            actions: global.actions.clone(),
            global,
            events: self
                .events
                .iter()
                .map(|e| EventReport {
                    event: *e,
                    stats: event_stats(e, &self.series[e.segment], &self.config.weight_text).ok(),
                })
                .collect(),
            freezes: self.freezes.clone(),
            filter_hits,
            selection: selection.map(|f| self.event_list(None, f)),
        }
    }

    /// Hits of one filter (default parameters) within one action, from a
    /// report-style computation.
    pub fn hits(&self, filter: &str, action: Action) -> Result<Vec<EventId>, QueryError> {
        let spec = self.parse_filters(&[filter])?;
        Ok(self.filtered_events(Some(action), &spec).ids())
    }
}
