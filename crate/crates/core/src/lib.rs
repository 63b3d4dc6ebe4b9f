//! Analytics core for clinical motion monitoring.
//!
//! The pipeline: ingest captures and action labels ([`model`]), compute
//! pelvis-local body variables per frame ([`kinematics`]), turn labels into
//! events and find freeze candidates ([`events`]), and summarize long
//! recordings without losing their outliers ([`aggregate`]). [`synthgen`]
//! produces deterministic recordings with known injected deficits, and
//! [`analysis`] bundles everything a query front end needs.

pub mod aggregate;
pub mod analysis;
pub mod config;
pub mod events;
pub mod geometry;
pub mod kinematics;
pub mod model;
pub mod numeric;
pub mod synthgen;

pub use aggregate::{BinnedSeries, Distribution, EventStats, GlobalStats, Scope};
pub use analysis::{Analysis, QueryError};
pub use config::Config;
pub use events::{Event, EventId, EventSet, FilterSpec, FreezeInterval};
pub use geometry::Vec3;
pub use kinematics::{BodyVariableSeries, LocalFrame, Variable};
pub use model::{Action, ActionLabel, Capture, Dataset, IngestError, ParseMode};
