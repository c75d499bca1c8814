use crate::error::{Error, Result};
use crate::raster::Encoding;
use crate::sampler::PerspectiveCrop;

use super::{PdotClassifier, PdotScore};

/// Default clearance threshold in meters; equal to the travel distance used
/// by the synthetic ground-truth oracle.
pub const DEFAULT_DEPTH_TAU: f64 = 6.0;

/// Fraction of the crop width, centered, whose depths are pooled.
const BAND_FRACTION: f64 = 0.10;

/// Scores a depth crop 1 when the median depth of its central column band
/// reaches `tau` meters, else 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthHeuristic {
    pub tau: f64,
}

impl Default for DepthHeuristic {
    fn default() -> Self {
        Self {
            tau: DEFAULT_DEPTH_TAU,
        }
    }
}

impl DepthHeuristic {
    pub fn new(tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::Config(format!("depth threshold {tau} must be finite and >= 0")));
        }
        Ok(Self { tau })
    }

    /// Median depth over the central 10%-width band of columns (all rows).
    pub fn band_median(crop: &PerspectiveCrop) -> Result<f64> {
        let r = &crop.raster;
        if r.encoding() != Encoding::DepthMeters || r.channels() != 1 {
            return Err(Error::ClassifierInput(
                "depth heuristic needs a single-channel depth crop".into(),
            ));
        }
        let w = r.width() as f64;
        let lo = 0.5 - BAND_FRACTION / 2.0;
        let hi = 0.5 + BAND_FRACTION / 2.0;
        let cols: Vec<usize> = (0..r.width())
            .filter(|&i| {
                let c = (i as f64 + 0.5) / w;
                c >= lo && c <= hi
            })
            .collect();
        let cols = if cols.is_empty() { vec![r.width() / 2] } else { cols };
        let mut vals: Vec<f64> = Vec::with_capacity(cols.len() * r.height());
        for y in 0..r.height() {
            for &x in &cols {
                vals.push(r.get(x, y, 0) as f64);
            }
        }
        vals.sort_by(|a, b| a.total_cmp(b));
        let n = vals.len();
        Ok(if n % 2 == 1 {
            vals[n / 2]
        } else {
            0.5 * (vals[n / 2 - 1] + vals[n / 2])
        })
    }
}

impl PdotClassifier for DepthHeuristic {
    fn classify(&self, crop: &PerspectiveCrop) -> Result<PdotScore> {
        let m = Self::band_median(crop)?;
        PdotScore::new(if m >= self.tau { 1.0 } else { 0.0 })
    }

    fn name(&self) -> &str {
        "depth-heuristic"
    }
}
