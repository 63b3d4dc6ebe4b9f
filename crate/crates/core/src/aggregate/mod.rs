//! Outlier-preserving aggregation: σ-binning for the simplified heatmaps,
//! min/max-preserving downsampling for the raw ones, legend distributions
//! and the summary statistics of the detail view.

mod distribution;
mod downsample;
mod simplify;
mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use distribution::{distribution, paired_distribution, Distribution, HISTOGRAM_BINS};
pub use downsample::{downsample, DownsamplePoint};
pub use simplify::{simplify, Bin, BinnedSeries, ScopeStats};
pub use stats::{
    event_stats, global_stats, ActionTotal, EventStats, GlobalStats, VariableSummary, WeightText,
};

/// Population over which the mean and standard deviation of a simplified
/// series are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// All frames of the currently selected events of the same action.
    #[default]
    Selection,
    /// Every frame of the dataset.
    Global,
}

impl std::str::FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "selection" => Ok(Scope::Selection),
            "global" => Ok(Scope::Global),
            other => Err(format!("unknown scope `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AggregateError {
    #[error("slice is empty")]
    EmptySlice,
    #[error("scope has no valid frames")]
    EmptyScope,
    #[error("event has no valid frames")]
    NoValidFrames,
    #[error("max_points must be at least 2, got {0}")]
    InvalidMaxPoints(usize),
}
