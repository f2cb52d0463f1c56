use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tunable constants of the relation models and the answer thresholds.
///
/// Loaded from a flat JSON object of `name -> number`; omitted names keep
/// their defaults and unknown names are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Constants {
    /// Box gap (m) at which `touching` reaches zero.
    pub touch_tolerance: f64,
    pub on_contact_weight: f64,
    pub on_overlap_weight: f64,
    /// Scaled centroid distance at which `near_raw` reaches zero.
    pub near_far_distance: f64,
    pub near_boost: f64,
    /// Upper bound for a context-boosted `near` value.
    pub near_boost_cap: f64,
    pub cone_half_angle_deg: f64,
    pub above_overlap_weight: f64,
    pub above_alignment_weight: f64,
    /// Horizontal centroid offset, in characteristic sizes, at which the
    /// alignment term of `above` vanishes.
    pub above_alignment_range: f64,
    pub between_along_weight: f64,
    pub between_perpendicular_weight: f64,
    /// Depth difference, in characteristic sizes, giving full deictic depth score.
    pub deictic_depth_scale: f64,
    /// Certainty at or above which an answer is confident.
    pub theta_yes: f64,
    /// Certainty at or above which an answer is reported as uncertain.
    pub theta_maybe: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            touch_tolerance: 0.015,
            on_contact_weight: 0.6,
            on_overlap_weight: 0.4,
            near_far_distance: 4.0,
            near_boost: 0.15,
            near_boost_cap: 0.9,
            cone_half_angle_deg: 45.0,
            above_overlap_weight: 0.5,
            above_alignment_weight: 0.5,
            above_alignment_range: 2.0,
            between_along_weight: 0.5,
            between_perpendicular_weight: 0.5,
            deictic_depth_scale: 1.0,
            theta_yes: 0.7,
            theta_maybe: 0.5,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstantsError {
    #[error("invalid constants document: {0}")]
    Parse(String),
    #[error("constant {name} = {value} is out of range: {reason}")]
    OutOfRange { name: &'static str, value: f64, reason: &'static str },
}

impl Constants {
    pub fn from_json(text: &str) -> Result<Self, ConstantsError> {
        let k: Constants = serde_json::from_str(text).map_err(|e| ConstantsError::Parse(e.to_string()))?;
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), ConstantsError> {
        let positive = [
            ("touch_tolerance", self.touch_tolerance),
            ("near_boost_cap", self.near_boost_cap),
            ("cone_half_angle_deg", self.cone_half_angle_deg),
            ("above_alignment_range", self.above_alignment_range),
            ("deictic_depth_scale", self.deictic_depth_scale),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConstantsError::OutOfRange { name, value, reason: "must be positive" });
            }
        }
        let unit = [
            ("on_contact_weight", self.on_contact_weight),
            ("on_overlap_weight", self.on_overlap_weight),
            ("near_boost", self.near_boost),
            ("near_boost_cap", self.near_boost_cap),
            ("above_overlap_weight", self.above_overlap_weight),
            ("above_alignment_weight", self.above_alignment_weight),
            ("between_along_weight", self.between_along_weight),
            ("between_perpendicular_weight", self.between_perpendicular_weight),
        ];
        for (name, value) in unit {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConstantsError::OutOfRange { name, value, reason: "must lie in [0, 1]" });
            }
        }
        let pairs = [
            ("on_*_weight", self.on_contact_weight + self.on_overlap_weight),
            ("above_*_weight", self.above_overlap_weight + self.above_alignment_weight),
            ("between_*_weight", self.between_along_weight + self.between_perpendicular_weight),
        ];
        for (name, value) in pairs {
            if (value - 1.0).abs() > 1e-9 {
                return Err(ConstantsError::OutOfRange { name, value, reason: "weights must sum to 1" });
            }
        }
        if !(self.near_far_distance > 1.0) {
            return Err(ConstantsError::OutOfRange {
                name: "near_far_distance",
                value: self.near_far_distance,
                reason: "must exceed 1",
            });
        }
        if !(self.cone_half_angle_deg < 90.0) {
            return Err(ConstantsError::OutOfRange {
                name: "cone_half_angle_deg",
                value: self.cone_half_angle_deg,
                reason: "must be below 90",
            });
        }
        if !(0.0 < self.theta_maybe && self.theta_maybe < self.theta_yes && self.theta_yes <= 1.0) {
            return Err(ConstantsError::OutOfRange {
                name: "theta_maybe",
                value: self.theta_maybe,
                reason: "thresholds need 0 < theta_maybe < theta_yes <= 1",
            });
        }
        Ok(())
    }
}
