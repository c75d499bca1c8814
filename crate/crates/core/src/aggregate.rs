//! Per-frame intersection verdicts from per-view PDoT decisions.

use serde::{Deserialize, Serialize};

use crate::classifier::PdotScore;
use crate::error::{Error, Result};

pub const DEFAULT_MIN_PDOTS: usize = 3;
pub const DEFAULT_SCORE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameVerdict {
    pub frame_id: String,
    pub pdot_count: usize,
    pub is_intersection: bool,
    /// Hard decision per view, in ring order.
    pub decisions: Vec<bool>,
    /// Minimum PDoT count the verdict was taken at.
    pub k: usize,
}

/// A frame is an intersection when at least `k` of its views score at or above `score_threshold`.
pub fn identify_intersection(
    frame_id: &str,
    scores: &[PdotScore],
    k: usize,
    score_threshold: f64,
) -> Result<FrameVerdict> {
    if scores.is_empty() {
        return Err(Error::Aggregation("empty score list".into()));
    }
    if k == 0 || k > scores.len() {
        return Err(Error::Aggregation(format!(
            "k = {k} must be in 1..={}",
            scores.len()
        )));
    }
    if !score_threshold.is_finite() {
        return Err(Error::Aggregation("non-finite score threshold".into()));
    }
    let decisions: Vec<bool> = scores.iter().map(|s| s.value() >= score_threshold).collect();
    let pdot_count = decisions.iter().filter(|d| **d).count();
    Ok(FrameVerdict {
        frame_id: frame_id.to_owned(),
        pdot_count,
        is_intersection: pdot_count >= k,
        decisions,
        k,
    })
}
