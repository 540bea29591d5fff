use rand::seq::SliceRandom;

use super::{check_classes, TrainConfig, TrainReport};
use crate::edgeops::FeatureSet;
use crate::error::{Error, Result};
use crate::math::{bce_with_logit, dot, sigmoid};
use crate::rng::rng_from;

const SHUFFLE_STREAM: u64 = 0x106;

/// Linear link model over the concatenation of every per-type edge vector.
#[derive(Clone, Debug, PartialEq)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogRegModel {
    pub fn zeros(width: usize) -> Self {
        LogRegModel { weights: vec![0.0; width], bias: 0.0 }
    }

    pub fn width(&self) -> usize {
        self.weights.len()
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.weights.len() {
            return Err(Error::ShapeMismatch(format!(
                "logistic regression expects {} features, got {}",
                self.weights.len(),
                x.len()
            )));
        }
        Ok(())
    }

    pub fn logit(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(dot(&self.weights, x) + self.bias)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.logit(x)?))
    }

    /// Mean cross-entropy over the rows in `idx`.
    pub fn loss(&self, data: &FeatureSet, idx: &[usize]) -> f64 {
        idx.iter()
            .map(|&i| bce_with_logit(dot(&self.weights, data.row(i)) + self.bias, data.labels[i] as u8 as f64))
            .sum::<f64>()
            / idx.len().max(1) as f64
    }

    /// Gradient of [`loss`](Self::loss), shaped like the model.
    pub fn gradient(&self, data: &FeatureSet, idx: &[usize]) -> LogRegModel {
        let mut g = LogRegModel::zeros(self.width());
        let scale = 1.0 / idx.len().max(1) as f64;
        for &i in idx {
            let x = data.row(i);
            // Unclamped so the gradient matches the loss everywhere.
            let z = dot(&self.weights, x) + self.bias;
            let p = 1.0 / (1.0 + (-z).exp());
            let d = (p - data.labels[i] as u8 as f64) * scale;
            for (gw, xi) in g.weights.iter_mut().zip(x) {
                *gw += d * xi;
            }
            g.bias += d;
        }
        g
    }
}

/// Fits a logistic regression by minibatch SGD on cross-entropy.
pub fn train_logreg(data: &FeatureSet, cfg: &TrainConfig) -> Result<(LogRegModel, TrainReport)> {
    cfg.validate()?;
    check_classes(&data.labels)?;
    let mut model = LogRegModel::zeros(data.width());
    let mut rng = rng_from(cfg.seed, &[SHUFFLE_STREAM]);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut report = TrainReport::default();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let g = model.gradient(data, batch);
            for (w, gw) in model.weights.iter_mut().zip(&g.weights) {
                *w -= cfg.learning_rate * gw;
            }
            model.bias -= cfg.learning_rate * g.bias;
        }
        let loss = model.loss(data, &order);
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("logistic regression loss became {loss} in epoch {epoch}")));
        }
        report.epoch_loss.push(loss);
    }
    report.best_epoch = cfg.epochs.saturating_sub(1);
    Ok((model, report))
}
