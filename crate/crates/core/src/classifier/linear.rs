//! Logistic regression over 16x16 area-averaged grayscale features.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Encoding;
use crate::sampler::PerspectiveCrop;
use crate::synth::FAR_CAP_M;

use super::{PdotClassifier, PdotScore};

pub const FEATURE_GRID: usize = 16;
/// 256 features plus bias.
pub const MODEL_DIMS: usize = FEATURE_GRID * FEATURE_GRID + 1;

const HEADER: &str = "pdot-linear v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// `None` trains full-batch; `Some(b)` shuffles into mini-batches of `b` each epoch.
    pub batch_size: Option<usize>,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            epochs: 300,
            batch_size: None,
            l2: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Training-set loss after each epoch.
    pub epoch_losses: Vec<f64>,
    /// False if any epoch increased the loss beyond round-off.
    pub converged: bool,
    pub train_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Vec<f64>,
}

impl LinearModel {
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.len() != MODEL_DIMS {
            return Err(Error::Model(format!(
                "expected {MODEL_DIMS} weights, got {}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Model("non-finite weight".into()));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn logit(&self, features: &[f64]) -> f64 {
        dot(&self.weights, features)
    }

    pub fn predict_features(&self, features: &[f64]) -> f64 {
        sigmoid(self.logit(features))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = String::new();
        writeln!(s, "{HEADER}").unwrap();
        writeln!(s, "dims {}", self.weights.len()).unwrap();
        for w in &self.weights {
            writeln!(s, "{w}").unwrap();
        }
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == HEADER => {}
            other => {
                return Err(Error::Model(format!(
                    "bad header {:?}, expected {HEADER:?}",
                    other.unwrap_or("")
                )))
            }
        }
        let dims: usize = lines
            .next()
            .and_then(|l| l.trim().strip_prefix("dims "))
            .and_then(|d| d.trim().parse().ok())
            .ok_or_else(|| Error::Model("missing dims line".into()))?;
        let weights = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Model(format!("weight {l:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if weights.len() != dims {
            return Err(Error::Model(format!(
                "header says {dims} weights, file has {}",
                weights.len()
            )));
        }
        Self::from_weights(weights)
    }
}

impl PdotClassifier for LinearModel {
    fn classify(&self, crop: &PerspectiveCrop) -> Result<PdotScore> {
        let f = crop_features(crop)?;
        PdotScore::new(self.predict_features(&f))
    }

    fn name(&self) -> &str {
        "linear"
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Overlap weights of source pixels with each of `cells` equal bins over `[0, size)`.
fn area_weights(size: usize, cells: usize) -> Vec<Vec<(usize, f64)>> {
    let step = size as f64 / cells as f64;
    (0..cells)
        .map(|k| {
            let (lo, hi) = (k as f64 * step, (k + 1) as f64 * step);
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(size);
            (first..last)
                .filter_map(|p| {
                    let ov = (hi.min(p as f64 + 1.0) - lo.max(p as f64)).max(0.0);
                    (ov > 0.0).then_some((p, ov / step))
                })
                .collect()
        })
        .collect()
}

/// 256 area-averaged grayscale features in roughly `[0, 1]`, followed by a constant 1.
///
/// Intensity is divided by 255; depth by the renderer's far cap.
pub fn crop_features(crop: &PerspectiveCrop) -> Result<Vec<f64>> {
    let r = &crop.raster;
    let scale = match r.encoding() {
        Encoding::Intensity => 1.0 / 255.0,
        Encoding::DepthMeters => 1.0 / FAR_CAP_M,
    };
    let wx = area_weights(r.width(), FEATURE_GRID);
    let wy = area_weights(r.height(), FEATURE_GRID);
    let mut out = Vec::with_capacity(MODEL_DIMS);
    for row in &wy {
        for col in &wx {
            let mut acc = 0.0;
            for &(y, a) in row {
                for &(x, b) in col {
                    acc += a * b * r.gray(x, y) as f64;
                }
            }
            let f = acc * scale;
            if !f.is_finite() {
                return Err(Error::Training("non-finite feature".into()));
            }
            out.push(f);
        }
    }
    out.push(1.0);
    Ok(out)
}

/// Mean binary cross-entropy plus `l2/2 * |w|^2` (bias excluded).
pub fn logistic_loss(weights: &[f64], features: &[Vec<f64>], labels: &[f64], l2: f64) -> f64 {
    let n = features.len() as f64;
    let data: f64 = features
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            let z = dot(weights, x);
            softplus(z) - y * z
        })
        .sum::<f64>()
        / n;
    let reg: f64 = weights[..weights.len() - 1].iter().map(|w| w * w).sum::<f64>() * l2 / 2.0;
    data + reg
}

/// Loss and its analytic gradient with respect to the weights.
pub fn logistic_loss_and_grad(
    weights: &[f64],
    features: &[Vec<f64>],
    labels: &[f64],
    l2: f64,
) -> (f64, Vec<f64>) {
    let n = features.len() as f64;
    let d = weights.len();
    let mut grad = vec![0.0; d];
    let mut loss = 0.0;
    for (x, &y) in features.iter().zip(labels) {
        let z = dot(weights, x);
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        for (g, xi) in grad.iter_mut().zip(x) {
            *g += r * xi;
        }
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    let mut reg = 0.0;
    for k in 0..d - 1 {
        reg += weights[k] * weights[k];
        grad[k] += l2 * weights[k];
    }
    (loss + reg * l2 / 2.0, grad)
}

pub fn train_linear_classifier(
    examples: &[(PerspectiveCrop, bool)],
    config: &TrainConfig,
) -> Result<(LinearModel, TrainReport)> {
    if examples.len() < 2 {
        return Err(Error::Training(format!(
            "need at least 2 examples, got {}",
            examples.len()
        )));
    }
    let positives = examples.iter().filter(|(_, l)| *l).count();
    if positives == 0 || positives == examples.len() {
        return Err(Error::Training("training set contains a single class".into()));
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::Training("learning rate must be positive".into()));
    }
    let features = examples
        .iter()
        .map(|(c, _)| crop_features(c))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<f64> = examples.iter().map(|(_, l)| if *l { 1.0 } else { 0.0 }).collect();

    let mut w = vec![0.0; MODEL_DIMS];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut losses = Vec::with_capacity(config.epochs);
    let mut prev = logistic_loss(&w, &features, &labels, config.l2);
    let mut converged = true;

    for _ in 0..config.epochs {
        match config.batch_size {
            None => {
                let (_, g) = logistic_loss_and_grad(&w, &features, &labels, config.l2);
                step(&mut w, &g, config.learning_rate);
            }
            Some(b) => {
                order.shuffle(&mut rng);
                for chunk in order.chunks(b.max(1)) {
                    let xs: Vec<Vec<f64>> = chunk.iter().map(|&i| features[i].clone()).collect();
                    let ys: Vec<f64> = chunk.iter().map(|&i| labels[i]).collect();
                    let (_, g) = logistic_loss_and_grad(&w, &xs, &ys, config.l2);
                    step(&mut w, &g, config.learning_rate);
                }
            }
        }
        let loss = logistic_loss(&w, &features, &labels, config.l2);
        if !loss.is_finite() {
            return Err(Error::Training("loss diverged".into()));
        }
        if loss > prev + 1e-12 * prev.abs().max(1.0) {
            converged = false;
        }
        prev = loss;
        losses.push(loss);
    }
    if !converged {
        log::warn!("training loss increased during at least one epoch");
    }

    let model = LinearModel::from_weights(w)?;
    let correct = features
        .iter()
        .zip(&labels)
        .filter(|(x, &y)| (model.predict_features(x) >= 0.5) == (y > 0.5))
        .count();
    Ok((
        model,
        TrainReport {
            epoch_losses: losses,
            converged,
            train_accuracy: correct as f64 / features.len() as f64,
        },
    ))
}

fn step(w: &mut [f64], g: &[f64], lr: f64) {
    for (wi, gi) in w.iter_mut().zip(g) {
        *wi -= lr * gi;
    }
}
