use serde::{Deserialize, Serialize};

use super::AggregateError;

/// One rendered heatmap cell: the bucket mean plus its extremes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DownsamplePoint {
    pub frame: usize,
    pub value: f64,
    pub min: f64,
    pub max: f64,
}

/// Reduces a slice to at most `max_points` buckets of equal frame span.
///
/// Slices no longer than `max_points` pass through unchanged (one point per
/// valid frame). Buckets with no valid frame are omitted.
pub fn downsample(
    values: &[f64],
    start_frame: usize,
    max_points: usize,
) -> Result<Vec<DownsamplePoint>, AggregateError> {
    if max_points < 2 {
        return Err(AggregateError::InvalidMaxPoints(max_points));
    }
    let n = values.len();
    if n <= max_points {
        return Ok(values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(k, &v)| DownsamplePoint {
                frame: start_frame + k,
                value: v,
                min: v,
                max: v,
            })
            .collect());
    }
    let mut out = Vec::with_capacity(max_points);
    for b in 0..max_points {
        let lo = b * n / max_points;
        let hi = (b + 1) * n / max_points;
        let (mut sum, mut count) = (0.0, 0usize);
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in values[lo..hi].iter().filter(|v| v.is_finite()) {
            sum += v;
            count += 1;
            min = min.min(v);
            max = max.max(v);
        }
        if count > 0 {
            out.push(DownsamplePoint {
                frame: start_frame + lo,
                value: sum / count as f64,
                min,
                max,
            });
        }
    }
    Ok(out)
}
