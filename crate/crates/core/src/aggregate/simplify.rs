use serde::{Deserialize, Serialize};

use super::{AggregateError, Scope};
use crate::kinematics::Variable;
use crate::numeric::mean_std;

/// Mean and population standard deviation of a scope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScopeStats {
    pub mean: f64,
    pub sigma: f64,
}

impl ScopeStats {
    /// Statistics of the finite values; `None` if there are none.
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let v: Vec<f64> = values.into_iter().filter(|v| v.is_finite()).collect();
        mean_std(&v).map(|(mean, sigma)| Self { mean, sigma })
    }

    pub fn is_outlier(&self, v: f64) -> bool {
        (v - self.mean).abs() > self.sigma
    }
}

/// A maximal run of consecutive valid frames of one class, summarized by
/// its mean. Frames are `[start_frame, end_frame)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub start_frame: usize,
    pub end_frame: usize,
    pub value: f64,
    pub is_outlier: bool,
}

impl Bin {
    pub fn width(&self) -> usize {
        self.end_frame - self.start_frame
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedSeries {
    pub variable: Variable,
    pub scope: Scope,
    pub mean: f64,
    pub sigma: f64,
    pub bins: Vec<Bin>,
}

/// Splits a slice into mean bins (`|v - μ| <= σ`) and outlier bins.
///
/// `values[k]` belongs to frame `start_frame + k`; non-finite values are
/// gaps and always end the current bin, so bins cover exactly the valid
/// frames.
pub fn simplify(
    variable: Variable,
    values: &[f64],
    start_frame: usize,
    scope: Scope,
    stats: ScopeStats,
) -> Result<BinnedSeries, AggregateError> {
    if values.is_empty() {
        return Err(AggregateError::EmptySlice);
    }
    let mut bins = Vec::new();
    // (start index, is_outlier, running sum)
    let mut open: Option<(usize, bool, f64)> = None;
    let close = |bins: &mut Vec<Bin>, (s, outlier, sum): (usize, bool, f64), end: usize| {
        bins.push(Bin {
            start_frame: start_frame + s,
            end_frame: start_frame + end,
            value: sum / (end - s) as f64,
            is_outlier: outlier,
        });
    };
    for (k, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            if let Some(run) = open.take() {
                close(&mut bins, run, k);
            }
            continue;
        }
        let outlier = stats.is_outlier(v);
        open = match open {
            Some((s, o, sum)) if o == outlier => Some((s, o, sum + v)),
            Some(run) => {
                close(&mut bins, run, k);
                Some((k, outlier, v))
            }
            None => Some((k, outlier, v)),
        };
    }
    if let Some(run) = open {
        close(&mut bins, run, values.len());
    }
    Ok(BinnedSeries {
        variable,
        scope,
        mean: stats.mean,
        sigma: stats.sigma,
        bins,
    })
}
