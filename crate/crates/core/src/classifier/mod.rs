//! Per-view PDoT scoring.
//!
//! A [`PdotClassifier`] looks at one perspective crop and reports how likely
//! it is that an observer could walk straight ahead into it. Two native
//! classifiers live here; scores from an external network arrive through
//! [`PredictionTable`].

mod depth;
mod linear;
mod predictions;

pub use depth::{DepthHeuristic, DEFAULT_DEPTH_TAU};
pub use linear::{
    crop_features, logistic_loss, logistic_loss_and_grad, train_linear_classifier, LinearModel,
    TrainConfig, TrainReport, FEATURE_GRID, MODEL_DIMS,
};
pub use predictions::{load_predictions, write_predictions, PredictionRecord, PredictionTable};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::PerspectiveCrop;

/// Confidence in `[0, 1]` that a crop's forward direction is travelable.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PdotScore(f64);

impl PdotScore {
    pub fn new(score: f64) -> Result<Self> {
        if !score.is_finite() || !(0.0..=1.0).contains(&score) {
            return Err(Error::ScoreRange(score));
        }
        Ok(Self(score))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PdotScore {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PdotScore> for f64 {
    fn from(s: PdotScore) -> f64 {
        s.0
    }
}

/// Behavioral contract shared by every per-view classifier.
///
/// Implementations hold immutable state after construction and must return
/// the same score for the same crop.
pub trait PdotClassifier: Send + Sync {
    fn classify(&self, crop: &PerspectiveCrop) -> Result<PdotScore>;

    fn name(&self) -> &str;

    fn version(&self) -> &str {
        env!("CARGO_PKG_VERSION")
    }
}
