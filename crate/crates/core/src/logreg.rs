//! Multinomial logistic regression trained by full-batch gradient descent.
//!
//! Used as a supervised reference point for role labeling; not part of the
//! unsupervised pipeline.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::features::FeatureMatrix;
use crate::labeling::{GoldLabeling, Labeling};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub classes: Vec<String>,
    pub dim: usize,
    /// One row per class: `dim` feature weights followed by the bias.
    pub weights: Vec<Vec<f64>>,
    pub l2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub l2: f64,
    pub tolerance: f64,
    /// Unused: training is deterministic.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_epochs: 500,
            l2: 1.0,
            tolerance: 1e-7,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = self.learning_rate.is_finite() && self.l2.is_finite() && self.tolerance.is_finite();
        if !finite || self.learning_rate <= 0.0 || self.l2 < 0.0 || self.tolerance < 0.0 || self.max_epochs == 0 {
            return Err(Error::config(
                "training needs learning_rate > 0, max_epochs >= 1, l2 >= 0, tolerance >= 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: LogRegModel,
    /// Loss before the first step, then after every step.
    pub losses: Vec<f64>,
}

impl LogRegModel {
    /// All-zero weights: uniform predictions.
    pub fn zeros(classes: Vec<String>, dim: usize, l2: f64) -> Self {
        let weights = vec![vec![0.0; dim + 1]; classes.len()];
        Self {
            classes,
            dim,
            weights,
            l2,
        }
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.weights.iter().map(|w| logit(w, x)).collect()
    }

    fn check_dim(&self, features: &FeatureMatrix) -> Result<()> {
        if features.dim() != self.dim || features.rows.iter().any(|r| r.len() != self.dim) {
            return Err(Error::data(format!(
                "feature dimension {} does not match the model ({})",
                features.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn predict_proba(&self, features: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
        self.check_dim(features)?;
        Ok(features.rows.iter().map(|x| softmax(&self.logits(x))).collect())
    }

    pub fn predict(&self, features: &FeatureMatrix) -> Result<Labeling> {
        self.check_dim(features)?;
        let mut out = Labeling::new();
        for (id, x) in features.instance_ids.iter().zip(&features.rows) {
            out.insert(id, self.classes[argmax(&self.logits(x))].clone());
        }
        Ok(out)
    }
}

fn logit(w: &[f64], x: &[f64]) -> f64 {
    let d = x.len();
    w[..d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[d]
}

/// First index of the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let s: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / s).collect()
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln()
}

/// Mean cross-entropy plus `(l2 / 2) * ||W||²` (bias excluded), and its
/// gradient with respect to every weight.
pub fn loss_and_gradient(
    weights: &[Vec<f64>],
    rows: &[Vec<f64>],
    targets: &[usize],
    l2: f64,
) -> (f64, Vec<Vec<f64>>) {
    let n = rows.len() as f64;
    let mut grad: Vec<Vec<f64>> = weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut loss = 0.0;
    for (x, &y) in rows.iter().zip(targets) {
        let z: Vec<f64> = weights.iter().map(|w| logit(w, x)).collect();
        let lse = log_sum_exp(&z);
        loss += lse - z[y];
        for (c, g) in grad.iter_mut().enumerate() {
            let residual = (z[c] - lse).exp() - if c == y { 1.0 } else { 0.0 };
            let d = x.len();
            for (gj, xj) in g[..d].iter_mut().zip(x) {
                *gj += residual * xj;
            }
            g[d] += residual;
        }
    }
    loss /= n;
    let mut penalty = 0.0;
    for (g, w) in grad.iter_mut().zip(weights) {
        let d = w.len() - 1;
        for (gj, wj) in g[..d].iter_mut().zip(&w[..d]) {
            *gj = *gj / n + l2 * wj;
            penalty += wj * wj;
        }
        g[d] /= n;
    }
    (loss + 0.5 * l2 * penalty, grad)
}

/// Trains on index-aligned rows and class indices.
pub fn train_rows(
    rows: &[Vec<f64>],
    targets: &[usize],
    classes: Vec<String>,
    config: &TrainConfig,
) -> Result<TrainReport> {
    config.validate()?;
    if classes.len() < 2 {
        return Err(Error::data(format!(
            "training needs at least 2 classes, found {}",
            classes.len()
        )));
    }
    if rows.is_empty() || rows.len() != targets.len() {
        return Err(Error::data("training needs one target per (non-empty) row set"));
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::data("training rows have different lengths"));
    }
    let mut model = LogRegModel::zeros(classes, dim, config.l2);
    let (mut loss, mut grad) = loss_and_gradient(&model.weights, rows, targets, config.l2);
    let mut losses = vec![loss];
    for epoch in 1..=config.max_epochs {
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            for (wj, gj) in w.iter_mut().zip(g) {
                *wj -= config.learning_rate * gj;
            }
        }
        let (next, next_grad) = loss_and_gradient(&model.weights, rows, targets, config.l2);
        if !next.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        losses.push(next);
        let improvement = loss - next;
        loss = next;
        grad = next_grad;
        if improvement < config.tolerance {
            break;
        }
    }
    Ok(TrainReport { model, losses })
}

/// Trains on a feature matrix with gold labels for every instance. Classes are
/// the sorted distinct gold labels.
pub fn train(
    features: &FeatureMatrix,
    labels: &GoldLabeling,
    config: &TrainConfig,
) -> Result<LogRegModel> {
    train_with_report(features, labels, config).map(|r| r.model)
}

pub fn train_with_report(
    features: &FeatureMatrix,
    labels: &GoldLabeling,
    config: &TrainConfig,
) -> Result<TrainReport> {
    let gold = labels.aligned(&features.instance_ids)?;
    let classes: Vec<String> = gold
        .iter()
        .copied()
        .collect::<BTreeSet<&str>>()
        .into_iter()
        .map(str::to_string)
        .collect();
    let targets: Vec<usize> = gold
        .iter()
        .map(|g| classes.binary_search_by(|c| c.as_str().cmp(g)).expect("class present"))
        .collect();
    train_rows(&features.rows, &targets, classes, config)
}
