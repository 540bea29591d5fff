//! Multi-tower link model.
//!
//! Each edge type's vector passes through its own dense + ReLU tower. Tower
//! outputs are concatenated and fused by a dense + ReLU layer whose
//! activation is the unified edge embedding; a single sigmoid unit on top
//! gives the link probability.
//!
//! All parameters live in one flat vector. Dense weights are stored
//! row-major as `out x in`, each followed by its bias.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{check_classes, TrainConfig, TrainReport};
use crate::edgeops::FeatureSet;
use crate::error::{Error, Result};
use crate::eval::auc;
use crate::math::{bce_with_logit, dot, sigmoid};
use crate::rng::rng_from;

/// Width of every tower and of the unified embedding.
pub const HIDDEN_WIDTH: usize = 256;

const INIT_STREAM: u64 = 0x3707;
const SPLIT_STREAM: u64 = 0x5917;
const SHUFFLE_STREAM: u64 = 0x5417;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MtnArch {
    /// Input length of each tower, in edge-type order.
    pub input_lens: Vec<usize>,
    pub tower_width: usize,
    pub fusion_width: usize,
}

impl MtnArch {
    pub fn new(input_lens: Vec<usize>) -> Self {
        MtnArch { input_lens, tower_width: HIDDEN_WIDTH, fusion_width: HIDDEN_WIDTH }
    }

    pub fn for_features(data: &FeatureSet) -> Self {
        Self::new(vec![data.segment_len; data.num_types()])
    }

    pub fn num_towers(&self) -> usize {
        self.input_lens.len()
    }

    pub fn input_width(&self) -> usize {
        self.input_lens.iter().sum()
    }

    fn validate(&self) -> Result<()> {
        if self.input_lens.is_empty() || self.input_lens.contains(&0) || self.tower_width == 0 || self.fusion_width == 0 {
            return Err(Error::InvalidConfig(format!("degenerate multi-tower architecture {self:?}")));
        }
        Ok(())
    }
}

/// Offsets of one dense layer inside the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dense {
    pub weight: usize,
    pub bias: usize,
    pub inputs: usize,
    pub outputs: usize,
}

impl Dense {
    fn end(&self) -> usize {
        self.bias + self.outputs
    }

    /// `out = W x + b`
    #[inline]
    fn apply(&self, params: &[f64], x: &[f64], out: &mut [f64]) {
        let w = &params[self.weight..self.bias];
        let b = &params[self.bias..self.end()];
        for (j, o) in out.iter_mut().enumerate() {
            *o = dot(&w[j * self.inputs..(j + 1) * self.inputs], x) + b[j];
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Layout {
    towers: Vec<Dense>,
    fusion: Dense,
    output: Dense,
    len: usize,
}

impl Layout {
    fn new(arch: &MtnArch) -> Self {
        let mut at = 0;
        let mut dense = |inputs: usize, outputs: usize| {
            let d = Dense { weight: at, bias: at + inputs * outputs, inputs, outputs };
            at = d.end();
            d
        };
        let towers = arch.input_lens.iter().map(|&n| dense(n, arch.tower_width)).collect();
        let fusion = dense(arch.tower_width * arch.num_towers(), arch.fusion_width);
        let output = dense(arch.fusion_width, 1);
        Layout { towers, fusion, output, len: at }
    }
}

/// Activations kept from a forward pass.
#[derive(Clone, Debug, Default)]
pub struct Activations {
    /// Concatenated post-ReLU tower outputs.
    pub towers: Vec<f64>,
    /// Post-ReLU fusion output: the unified edge embedding.
    pub unified: Vec<f64>,
    /// Unclamped output logit.
    pub logit: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiTowerNet {
    arch: MtnArch,
    layout: Layout,
    params: Vec<f64>,
}

impl MultiTowerNet {
    /// Every weight and bias zero.
    pub fn zeros(arch: MtnArch) -> Result<Self> {
        arch.validate()?;
        let layout = Layout::new(&arch);
        let params = vec![0.0; layout.len];
        Ok(MultiTowerNet { arch, layout, params })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(arch: MtnArch, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(arch)?;
        let mut rng = rng_from(seed, &[INIT_STREAM]);
        let layers: Vec<Dense> = net.layers().collect();
        for d in layers {
            let limit = (6.0 / (d.inputs + d.outputs) as f64).sqrt();
            for w in &mut net.params[d.weight..d.bias] {
                *w = rng.gen_range(-limit..limit);
            }
        }
        Ok(net)
    }

    pub fn from_params(arch: MtnArch, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(arch)?;
        if params.len() != net.params.len() {
            return Err(Error::ShapeMismatch(format!(
                "architecture needs {} parameters, got {}",
                net.params.len(),
                params.len()
            )));
        }
        net.params = params;
        Ok(net)
    }

    pub fn arch(&self) -> &MtnArch {
        &self.arch
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn tower(&self, t: usize) -> Dense {
        self.layout.towers[t]
    }

    pub fn fusion(&self) -> Dense {
        self.layout.fusion
    }

    pub fn output(&self) -> Dense {
        self.layout.output
    }

    /// Towers, then fusion, then output.
    pub fn layers(&self) -> impl Iterator<Item = Dense> + '_ {
        self.layout.towers.iter().copied().chain([self.layout.fusion, self.layout.output])
    }

    /// Row-major `out x in` weight block of a layer.
    pub fn weight(&self, d: Dense) -> &[f64] {
        &self.params[d.weight..d.bias]
    }

    pub fn bias(&self, d: Dense) -> &[f64] {
        &self.params[d.bias..d.end()]
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.arch.input_width() {
            return Err(Error::ShapeMismatch(format!(
                "multi-tower net expects {} features, got {}",
                self.arch.input_width(),
                x.len()
            )));
        }
        Ok(())
    }

    fn forward_into(&self, x: &[f64], act: &mut Activations) {
        let tw = self.arch.tower_width;
        act.towers.resize(tw * self.arch.num_towers(), 0.0);
        act.unified.resize(self.arch.fusion_width, 0.0);
        let mut start = 0;
        for (t, d) in self.layout.towers.iter().enumerate() {
            let xt = &x[start..start + d.inputs];
            start += d.inputs;
            let h = &mut act.towers[t * tw..(t + 1) * tw];
            d.apply(&self.params, xt, h);
            h.iter_mut().for_each(|v| *v = v.max(0.0));
        }
        self.layout.fusion.apply(&self.params, &act.towers, &mut act.unified);
        act.unified.iter_mut().for_each(|v| *v = v.max(0.0));
        let mut out = [0.0];
        self.layout.output.apply(&self.params, &act.unified, &mut out);
        act.logit = out[0];
    }

    /// Full forward pass on flattened features.
    pub fn activations(&self, x: &[f64]) -> Result<Activations> {
        self.check(x)?;
        let mut act = Activations::default();
        self.forward_into(x, &mut act);
        Ok(act)
    }

    /// Link probability and unified edge embedding.
    pub fn forward(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let act = self.activations(x)?;
        Ok((sigmoid(act.logit), act.unified))
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.activations(x)?.logit))
    }

    /// Mean cross-entropy over rows `idx`.
    pub fn loss(&self, data: &FeatureSet, idx: &[usize]) -> f64 {
        let mut act = Activations::default();
        idx.iter()
            .map(|&i| {
                self.forward_into(data.row(i), &mut act);
                bce_with_logit(act.logit, data.labels[i] as u8 as f64)
            })
            .sum::<f64>()
            / idx.len().max(1) as f64
    }

    /// Gradient of [`loss`](Self::loss) with respect to the flat parameters.
    pub fn gradient(&self, data: &FeatureSet, idx: &[usize]) -> Vec<f64> {
        let mut grad = vec![0.0; self.params.len()];
        let mut bp = Backprop::new(&self.arch);
        for &i in idx {
            bp.accumulate(self, data.row(i), data.labels[i] as u8 as f64, 1.0 / idx.len() as f64, &mut grad);
        }
        grad
    }
}

struct Backprop {
    act: Activations,
    d_unified: Vec<f64>,
    d_towers: Vec<f64>,
}

impl Backprop {
    fn new(arch: &MtnArch) -> Self {
        Backprop {
            act: Activations::default(),
            d_unified: vec![0.0; arch.fusion_width],
            d_towers: vec![0.0; arch.tower_width * arch.num_towers()],
        }
    }

    /// Adds `scale * dLoss/dParams` for one example to `grad`. Returns the
    /// example's loss.
    fn accumulate(&mut self, net: &MultiTowerNet, x: &[f64], y: f64, scale: f64, grad: &mut [f64]) -> f64 {
        net.forward_into(x, &mut self.act);
        let logit = self.act.logit;
        let loss = bce_with_logit(logit, y);
        let d_logit = (1.0 / (1.0 + (-logit).exp()) - y) * scale;
        let p = &net.params;

        let out = net.layout.output;
        for (g, f) in grad[out.weight..out.bias].iter_mut().zip(&self.act.unified) {
            *g += d_logit * f;
        }
        grad[out.bias] += d_logit;

        for (j, d) in self.d_unified.iter_mut().enumerate() {
            *d = if self.act.unified[j] > 0.0 { d_logit * p[out.weight + j] } else { 0.0 };
        }

        let fus = net.layout.fusion;
        self.d_towers.iter_mut().for_each(|d| *d = 0.0);
        for (j, &dj) in self.d_unified.iter().enumerate() {
            if dj == 0.0 {
                continue;
            }
            let row = fus.weight + j * fus.inputs;
            let gw = &mut grad[row..row + fus.inputs];
            for (g, z) in gw.iter_mut().zip(&self.act.towers) {
                *g += dj * z;
            }
            grad[fus.bias + j] += dj;
            for (dz, w) in self.d_towers.iter_mut().zip(&p[row..row + fus.inputs]) {
                *dz += dj * w;
            }
        }
        for (dz, z) in self.d_towers.iter_mut().zip(&self.act.towers) {
            if *z <= 0.0 {
                *dz = 0.0;
            }
        }

        let tw = net.arch.tower_width;
        let mut start = 0;
        for (t, d) in net.layout.towers.iter().enumerate() {
            let xt = &x[start..start + d.inputs];
            start += d.inputs;
            for (j, &dj) in self.d_towers[t * tw..(t + 1) * tw].iter().enumerate() {
                if dj == 0.0 {
                    continue;
                }
                let row = d.weight + j * d.inputs;
                for (g, xi) in grad[row..row + d.inputs].iter_mut().zip(xt) {
                    *g += dj * xi;
                }
                grad[d.bias + j] += dj;
            }
        }
        loss
    }
}

/// Trains with the default 256-wide architecture.
pub fn train_mtn(data: &FeatureSet, cfg: &TrainConfig) -> Result<(MultiTowerNet, TrainReport)> {
    train_mtn_with_arch(data, MtnArch::for_features(data), cfg)
}

/// Minibatch SGD with backpropagation. A `validation_fraction` share of the
/// rows is held out; the returned parameters are those of the epoch with the
/// best validation AUC (the last epoch when no usable validation set exists).
pub fn train_mtn_with_arch(data: &FeatureSet, arch: MtnArch, cfg: &TrainConfig) -> Result<(MultiTowerNet, TrainReport)> {
    cfg.validate()?;
    check_classes(&data.labels)?;
    if arch.input_width() != data.width() {
        return Err(Error::ShapeMismatch(format!(
            "architecture consumes {} features, data has {}",
            arch.input_width(),
            data.width()
        )));
    }
    let mut net = MultiTowerNet::init(arch, cfg.seed)?;

    let mut all: Vec<usize> = (0..data.len()).collect();
    all.shuffle(&mut rng_from(cfg.seed, &[SPLIT_STREAM]));
    let n_val = ((data.len() as f64) * cfg.validation_fraction).floor() as usize;
    let (val, train) = all.split_at(n_val);
    let mut train = train.to_vec();
    let val_labels: Vec<bool> = val.iter().map(|&i| data.labels[i]).collect();
    let use_val = val_labels.iter().any(|&l| l) && val_labels.iter().any(|&l| !l);

    let mut rng = rng_from(cfg.seed, &[SHUFFLE_STREAM]);
    let mut grad = vec![0.0; net.params.len()];
    let mut bp = Backprop::new(&net.arch);
    let mut report = TrainReport::default();
    let mut best: Option<(f64, Vec<f64>)> = None;

    for epoch in 0..cfg.epochs {
        train.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in train.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                epoch_loss += bp.accumulate(&net, data.row(i), data.labels[i] as u8 as f64, scale, &mut grad);
            }
            for (p, g) in net.params.iter_mut().zip(&grad) {
                *p -= cfg.learning_rate * g;
            }
        }
        epoch_loss /= train.len().max(1) as f64;
        if !epoch_loss.is_finite() || net.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite(format!("multi-tower loss became {epoch_loss} in epoch {epoch}")));
        }
        report.epoch_loss.push(epoch_loss);

        if use_val {
            let scores = val.iter().map(|&i| net.predict(data.row(i))).collect::<Result<Vec<_>>>()?;
            let a = auc(&scores, &val_labels)?;
            report.val_auc.push(a);
            if best.as_ref().is_none_or(|(b, _)| a > *b) {
                best = Some((a, net.params.clone()));
                report.best_epoch = epoch;
            }
        } else {
            report.best_epoch = epoch;
        }
    }
    if let Some((_, params)) = best {
        net.params = params;
    }
    Ok((net, report))
}
