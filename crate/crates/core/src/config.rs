//! Every tunable threshold, in one structure shared by the CLI, the HTTP
//! service and the library.
//!
//! Config files are JSON with the same shape as [`Config`]; omitted fields
//! fall back to their defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::Scope;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config value `{field}` = {value} is out of range ({expected})")]
    OutOfRange {
        field: &'static str,
        value: f64,
        expected: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KinematicsConfig {
    /// Negate the forward axis for captures with opposite chirality.
    pub forward_flip: bool,
    /// Use the same-side distance in the weight-shift numerator instead of
    /// the opposite-side one.
    pub weight_literal: bool,
    /// Displacements beyond this many meters flag the frame as suspect.
    pub sanity_bound_m: f64,
    /// How many frames a degenerate pelvis frame may reuse the last valid one.
    pub fallback_frames: usize,
}

impl Default for KinematicsConfig {
    fn default() -> Self {
        Self {
            forward_flip: false,
            weight_literal: false,
            sanity_bound_m: 2.0,
            fallback_frames: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreezeConfig {
    /// Both feet must stay within this sagittal distance of the pelvis.
    pub feet_threshold_m: f64,
    pub min_freeze_s: f64,
    /// Longest run of invalid frames bridged inside a candidate freeze.
    pub max_gap_frames: usize,
}

impl Default for FreezeConfig {
    fn default() -> Self {
        Self {
            feet_threshold_m: 0.15,
            min_freeze_s: 1.0,
            max_gap_frames: 5,
        }
    }
}

/// Default parameters for filters given without an explicit value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterDefaults {
    pub min_duration_s: f64,
    pub high_trunk_deg: f64,
    pub high_trunk_percentile: f64,
    pub arm_ratio: f64,
    /// Lower bound on the denominator of the arm-use ratio, in meters.
    pub arm_floor_m: f64,
    pub weight_deviation: f64,
}

impl Default for FilterDefaults {
    fn default() -> Self {
        Self {
            min_duration_s: 5.0,
            high_trunk_deg: 25.0,
            high_trunk_percentile: 95.0,
            arm_ratio: 2.0,
            arm_floor_m: 0.05,
            weight_deviation: 0.15,
        }
    }
}

/// Cutoffs on `|mean weight_l - 0.5|` for the weight-shift text label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightTextThresholds {
    pub balanced: f64,
    pub slight: f64,
}

impl Default for WeightTextThresholds {
    fn default() -> Self {
        Self {
            balanced: 0.05,
            slight: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueryDefaults {
    pub max_points: usize,
    pub simplify_scope: Scope,
}

impl Default for QueryDefaults {
    fn default() -> Self {
        Self {
            max_points: 1000,
            simplify_scope: Scope::Selection,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub kinematics: KinematicsConfig,
    pub freeze: FreezeConfig,
    pub filters: FilterDefaults,
    pub weight_text: WeightTextThresholds,
    pub query: QueryDefaults,
}

fn check(field: &'static str, value: f64, ok: bool, expected: &'static str) -> Result<(), ConfigError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange {
            field,
            value,
            expected,
        })
    }
}

impl Config {
    pub fn from_json(bytes: &[u8]) -> Result<Self, ConfigError> {
        let cfg: Config =
            serde_json::from_slice(bytes).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let bytes = std::fs::read(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&bytes)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let k = &self.kinematics;
        check("kinematics.sanity_bound_m", k.sanity_bound_m, k.sanity_bound_m > 0.0, "> 0")?;
        let f = &self.freeze;
        check("freeze.feet_threshold_m", f.feet_threshold_m, f.feet_threshold_m > 0.0, "> 0")?;
        check("freeze.min_freeze_s", f.min_freeze_s, f.min_freeze_s > 0.0, "> 0")?;
        let d = &self.filters;
        check("filters.min_duration_s", d.min_duration_s, d.min_duration_s >= 0.0, ">= 0")?;
        check(
            "filters.high_trunk_deg",
            d.high_trunk_deg,
            (0.0..=180.0).contains(&d.high_trunk_deg),
            "0..=180",
        )?;
        check(
            "filters.high_trunk_percentile",
            d.high_trunk_percentile,
            (0.0..=100.0).contains(&d.high_trunk_percentile),
            "0..=100",
        )?;
        check("filters.arm_ratio", d.arm_ratio, d.arm_ratio >= 1.0, ">= 1")?;
        check("filters.arm_floor_m", d.arm_floor_m, d.arm_floor_m > 0.0, "> 0")?;
        check(
            "filters.weight_deviation",
            d.weight_deviation,
            (0.0..0.5).contains(&d.weight_deviation),
            "0..0.5",
        )?;
        let w = &self.weight_text;
        check(
            "weight_text.balanced",
            w.balanced,
            w.balanced >= 0.0 && w.balanced < w.slight,
            ">= 0 and < slight",
        )?;
        check("weight_text.slight", w.slight, w.slight < 0.5, "< 0.5")?;
        check(
            "query.max_points",
            self.query.max_points as f64,
            self.query.max_points >= 2,
            ">= 2",
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        Config::default().validate().unwrap();
    }

    #[test]
    fn partial_file_keeps_other_defaults() {
        let cfg = Config::from_json(br#"{"freeze":{"feet_threshold_m":0.2}}"#).unwrap();
        assert_eq!(cfg.freeze.feet_threshold_m, 0.2);
        assert_eq!(cfg.freeze.min_freeze_s, 1.0);
        assert_eq!(cfg.filters, FilterDefaults::default());
    }

    #[test]
    fn out_of_range_and_unknown_fields_rejected() {
        assert!(matches!(
            Config::from_json(br#"{"freeze":{"min_freeze_s":-1}}"#),
            Err(ConfigError::OutOfRange { field: "freeze.min_freeze_s", .. })
        ));
        assert!(matches!(
            Config::from_json(br#"{"freez":{}}"#),
            Err(ConfigError::Parse(_))
        ));
    }
}
