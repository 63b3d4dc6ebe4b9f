use serde::{Deserialize, Serialize};

use super::AggregateError;
use crate::kinematics::Variable;
use crate::numeric::percentile_sorted;

pub const HISTOGRAM_BINS: usize = 64;
const LOW_PERCENTILE: f64 = 0.5;
const HIGH_PERCENTILE: f64 = 99.5;

/// Histogram of one variable over a scope, ranged on its 0.5th to 99.5th
/// percentiles. Values outside that range are not counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub variable: Variable,
    /// Set when this is one side of a left/right pair sharing `edges`.
    pub paired: bool,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Distribution {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Index of the most populated bin (first on ties).
    pub fn mode_bin(&self) -> usize {
        let max = self.counts.iter().copied().max().unwrap_or(0);
        self.counts.iter().position(|&c| c == max).unwrap_or(0)
    }

    pub fn bin_range(&self, bin: usize) -> (f64, f64) {
        (self.edges[bin], self.edges[bin + 1])
    }
}

fn sorted_finite(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|v| v.is_finite()).collect();
    v.sort_unstable_by(f64::total_cmp);
    v
}

fn robust_range(sorted: &[f64]) -> (f64, f64) {
    (
        percentile_sorted(sorted, LOW_PERCENTILE).unwrap(),
        percentile_sorted(sorted, HIGH_PERCENTILE).unwrap(),
    )
}

fn histogram(variable: Variable, paired: bool, sorted: &[f64], lo: f64, hi: f64) -> Distribution {
    // A single-valued scope gets a unit-wide range centered on the value.
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let edges = (0..=HISTOGRAM_BINS)
        .map(|i| if i == HISTOGRAM_BINS { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0u64; HISTOGRAM_BINS];
    for &v in sorted.iter().filter(|&&v| v >= lo && v <= hi) {
        let idx = (((v - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
        counts[idx] += 1;
    }
    Distribution {
        variable,
        paired,
        edges,
        counts,
    }
}

pub fn distribution(
    variable: Variable,
    values: impl IntoIterator<Item = f64>,
) -> Result<Distribution, AggregateError> {
    let sorted = sorted_finite(values);
    if sorted.is_empty() {
        return Err(AggregateError::EmptyScope);
    }
    let (lo, hi) = robust_range(&sorted);
    Ok(histogram(variable, false, &sorted, lo, hi))
}

/// Left and right histograms over the union of both robust ranges.
pub fn paired_distribution(
    left: Variable,
    right: Variable,
    left_values: impl IntoIterator<Item = f64>,
    right_values: impl IntoIterator<Item = f64>,
) -> Result<(Distribution, Distribution), AggregateError> {
    let l = sorted_finite(left_values);
    let r = sorted_finite(right_values);
    let (lo, hi) = match (l.is_empty(), r.is_empty()) {
        (true, true) => return Err(AggregateError::EmptyScope),
        (false, true) => robust_range(&l),
        (true, false) => robust_range(&r),
        (false, false) => {
            let (a, b) = robust_range(&l);
            let (c, d) = robust_range(&r);
            (a.min(c), b.max(d))
        }
    };
    Ok((
        histogram(left, true, &l, lo, hi),
        histogram(right, true, &r, lo, hi),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value_all_in_one_bin() {
        let d = distribution(Variable::Trunk, vec![7.0; 20]).unwrap();
        assert_eq!(d.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(d.total(), 20);
        let (a, b) = d.bin_range(d.mode_bin());
        assert!(a <= 7.0 && 7.0 <= b);
    }

    #[test]
    fn balanced_weights_mode_contains_half() {
        // Symmetric triangle-ish samples around 0.5.
        let mut v = Vec::new();
        for i in 0..=200 {
            let x = 0.4 + 0.2 * i as f64 / 200.0;
            let reps = 101 - (i as i64 - 100).unsigned_abs() as usize;
            v.extend(std::iter::repeat_n(x, reps));
        }
        let d = distribution(Variable::WeightL, v).unwrap();
        let (a, b) = d.bin_range(d.mode_bin());
        assert!(a <= 0.5 && 0.5 <= b, "mode bin [{a}, {b}]");
    }

    #[test]
    fn counts_match_in_range_frames() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).chain([f64::NAN]).collect();
        let d = distribution(Variable::ArmL, v.clone()).unwrap();
        let (lo, hi) = (d.edges[0], d.edges[HISTOGRAM_BINS]);
        let in_range = v.iter().filter(|x| x.is_finite() && **x >= lo && **x <= hi).count();
        assert_eq!(d.total() as usize, in_range);
        assert_eq!(d.edges.len(), HISTOGRAM_BINS + 1);
    }

    #[test]
    fn paired_share_edges() {
        let (l, r) = paired_distribution(
            Variable::ArmL,
            Variable::ArmR,
            (0..100).map(|i| i as f64 * 0.01),
            (0..100).map(|i| 0.5 + i as f64 * 0.01),
        )
        .unwrap();
        assert_eq!(l.edges, r.edges);
        assert!(l.paired && r.paired);
        assert!(l.edges[0] < 0.01 && *r.edges.last().unwrap() > 1.4);
    }

    #[test]
    fn empty_scope() {
        assert_eq!(
            distribution(Variable::Trunk, [f64::NAN]),
            Err(AggregateError::EmptyScope)
        );
    }
}
