//! Fusion of per-type edge vectors into a link probability.
//!
//! Two models are provided: a logistic regression over the concatenated edge
//! vectors and a multi-tower network whose fusion layer yields a 256-d
//! unified edge embedding.

mod logreg;
mod mtn;

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

pub use logreg::{train_logreg, LogRegModel};
pub use mtn::{train_mtn, train_mtn_with_arch, Activations, Dense, MtnArch, MultiTowerNet, HIDDEN_WIDTH};

use crate::edgeops::{Combiner, FeatureSet, HeteroEdgeFeatures};
use crate::error::{Error, Result};
use crate::graph::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LabeledPair {
    pub u: NodeId,
    pub v: NodeId,
    pub label: bool,
}

impl LabeledPair {
    pub fn key(&self) -> (NodeId, NodeId) {
        if self.u <= self.v {
            (self.u, self.v)
        } else {
            (self.v, self.u)
        }
    }
}

/// Node pairs with binary link labels; no unordered pair appears twice.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabeledPairSet {
    pairs: Vec<LabeledPair>,
}

impl LabeledPairSet {
    pub fn new(pairs: Vec<LabeledPair>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(pairs.len());
        for p in &pairs {
            if p.u == p.v {
                return Err(Error::InvalidConfig(format!("pair ({}, {}) is a self-pair", p.u, p.v)));
            }
            if !seen.insert(p.key()) {
                return Err(Error::InvalidConfig(format!("pair ({}, {}) appears twice", p.u, p.v)));
            }
        }
        Ok(LabeledPairSet { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LabeledPair> {
        self.pairs.iter()
    }

    pub fn as_slice(&self) -> &[LabeledPair] {
        &self.pairs
    }

    pub fn positives(&self) -> usize {
        self.pairs.iter().filter(|p| p.label).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 0.01, batch_size: 256, epochs: 10, validation_fraction: 0.1, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 1 {
            return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::InvalidConfig("validation fraction must be in [0, 1)".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        Ok(())
    }
}

/// Per-epoch training diagnostics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    pub epoch_loss: Vec<f64>,
    /// Validation AUC per epoch (multi-tower net only).
    pub val_auc: Vec<f64>,
    pub best_epoch: usize,
}

pub(crate) fn check_classes(labels: &[bool]) -> Result<()> {
    if !(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l)) {
        return Err(Error::SingleClass);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    LogReg,
    Mtn,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::LogReg => "logreg",
            ModelKind::Mtn => "mtn",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logreg" => Ok(ModelKind::LogReg),
            "mtn" => Ok(ModelKind::Mtn),
            other => Err(Error::InvalidConfig(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FusionModel {
    LogReg(LogRegModel),
    Mtn(MultiTowerNet),
}

impl FusionModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            FusionModel::LogReg(_) => ModelKind::LogReg,
            FusionModel::Mtn(_) => ModelKind::Mtn,
        }
    }

    pub fn predict_flat(&self, x: &[f64]) -> Result<f64> {
        match self {
            FusionModel::LogReg(m) => m.predict(x),
            FusionModel::Mtn(m) => m.predict(x),
        }
    }
}

/// Trains either model on a feature set.
pub fn train(kind: ModelKind, data: &FeatureSet, cfg: &TrainConfig) -> Result<(FusionModel, TrainReport)> {
    Ok(match kind {
        ModelKind::LogReg => {
            let (m, r) = train_logreg(data, cfg)?;
            (FusionModel::LogReg(m), r)
        }
        ModelKind::Mtn => {
            let (m, r) = train_mtn(data, cfg)?;
            (FusionModel::Mtn(m), r)
        }
    })
}

/// Feature layout a model was trained on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureSpec {
    pub type_names: Vec<String>,
    pub combiner: Combiner,
    pub segment_len: usize,
}

impl FeatureSpec {
    pub fn of(data: &FeatureSet) -> Self {
        FeatureSpec { type_names: data.type_names.clone(), combiner: data.combiner, segment_len: data.segment_len }
    }

    pub fn width(&self) -> usize {
        self.type_names.len() * self.segment_len
    }
}

/// A trained model plus the feature layout and graph it belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelArtifact {
    pub spec: FeatureSpec,
    pub graph_hash: String,
    pub model: FusionModel,
}

impl ModelArtifact {
    pub fn check_features(&self, data: &FeatureSet) -> Result<()> {
        if FeatureSpec::of(data) != self.spec {
            return Err(Error::ShapeMismatch(format!(
                "model expects {:?}/{} x{} features, got {:?}/{} x{}",
                self.spec.type_names,
                self.spec.combiner,
                self.spec.segment_len,
                data.type_names,
                data.combiner,
                data.segment_len
            )));
        }
        Ok(())
    }

    pub fn predict(&self, features: &HeteroEdgeFeatures) -> Result<f64> {
        if features.combiner != self.spec.combiner
            || features.vectors.len() != self.spec.type_names.len()
            || features.vectors.iter().any(|v| v.values.len() != self.spec.segment_len)
        {
            return Err(Error::ShapeMismatch("feature bundle does not match the model".into()));
        }
        self.model.predict_flat(&features.flatten())
    }

    /// Writes the `HETEDGE-MODEL v1` text container.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "HETEDGE-MODEL v1")?;
        writeln!(w, "kind {}", self.model.kind())?;
        writeln!(w, "graph {}", if self.graph_hash.is_empty() { "-" } else { &self.graph_hash })?;
        writeln!(w, "combiner {}", self.spec.combiner)?;
        writeln!(w, "types {}", self.spec.type_names.join(" "))?;
        writeln!(w, "segment_len {}", self.spec.segment_len)?;
        match &self.model {
            FusionModel::LogReg(m) => {
                write_param(&mut w, "weight", 1, &m.weights)?;
                write_param(&mut w, "bias", 1, &[m.bias])?;
            }
            FusionModel::Mtn(net) => {
                let arch = net.arch();
                writeln!(w, "tower_width {}", arch.tower_width)?;
                writeln!(w, "fusion_width {}", arch.fusion_width)?;
                let names = self
                    .spec
                    .type_names
                    .iter()
                    .map(|t| format!("tower.{t}"))
                    .chain(["fusion".to_string(), "output".to_string()]);
                for (name, d) in names.zip(net.layers().collect::<Vec<_>>()) {
                    write_param(&mut w, &format!("{name}.weight"), d.outputs, net.weight(d))?;
                    write_param(&mut w, &format!("{name}.bias"), 1, net.bias(d))?;
                }
            }
        }
        writeln!(w, "end")?;
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = ModelLines { inner: r.lines(), line: 0 };
        let (n, header) = lines.next()?;
        if header.trim() != "HETEDGE-MODEL v1" {
            return Err(Error::parse(n, "expected `HETEDGE-MODEL v1` header"));
        }
        let kind: ModelKind = lines.field("kind")?.1.parse()?;
        let graph_hash = match lines.field("graph")?.1.as_str() {
            "-" => String::new(),
            h => h.to_string(),
        };
        let combiner: Combiner = lines.field("combiner")?.1.parse()?;
        let type_names: Vec<String> = lines.field("types")?.1.split_whitespace().map(String::from).collect();
        let segment_len = lines.usize_field("segment_len")?;
        let spec = FeatureSpec { type_names, combiner, segment_len };

        let model = match kind {
            ModelKind::LogReg => {
                let weights = lines.param("weight", 1, spec.width())?;
                let bias = lines.param("bias", 1, 1)?[0];
                FusionModel::LogReg(LogRegModel { weights, bias })
            }
            ModelKind::Mtn => {
                let tower_width = lines.usize_field("tower_width")?;
                let fusion_width = lines.usize_field("fusion_width")?;
                let arch = MtnArch {
                    input_lens: vec![spec.segment_len; spec.type_names.len()],
                    tower_width,
                    fusion_width,
                };
                let shape = MultiTowerNet::zeros(arch.clone())?;
                let names = spec
                    .type_names
                    .iter()
                    .map(|t| format!("tower.{t}"))
                    .chain(["fusion".to_string(), "output".to_string()]);
                let mut params = Vec::with_capacity(shape.params().len());
                for (name, d) in names.zip(shape.layers().collect::<Vec<_>>()) {
                    params.extend(lines.param(&format!("{name}.weight"), d.outputs, d.inputs)?);
                    params.extend(lines.param(&format!("{name}.bias"), 1, d.outputs)?);
                }
                FusionModel::Mtn(MultiTowerNet::from_params(arch, params)?)
            }
        };
        let (n, end) = lines.next()?;
        if end.trim() != "end" {
            return Err(Error::parse(n, "expected `end`"));
        }
        Ok(ModelArtifact { spec, graph_hash, model })
    }
}

struct ModelLines<L> {
    inner: L,
    line: usize,
}

impl<L: Iterator<Item = std::io::Result<String>>> ModelLines<L> {
    fn next(&mut self) -> Result<(usize, String)> {
        self.line += 1;
        match self.inner.next() {
            Some(l) => Ok((self.line, l?)),
            None => Err(Error::artifact("model", "unexpected end of file")),
        }
    }

    fn field(&mut self, key: &str) -> Result<(usize, String)> {
        let (n, line) = self.next()?;
        let rest = line
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| Error::parse(n, format!("expected `{key} …`")))?;
        Ok((n, rest.to_string()))
    }

    fn usize_field(&mut self, key: &str) -> Result<usize> {
        let (n, v) = self.field(key)?;
        v.trim().parse().map_err(|_| Error::parse(n, format!("bad `{key}` value")))
    }

    fn param(&mut self, name: &str, rows: usize, cols: usize) -> Result<Vec<f64>> {
        let (n, line) = self.next()?;
        let expect = format!("param {name} {rows} {cols}");
        if line.trim() != expect {
            return Err(Error::parse(n, format!("expected `{expect}`, found `{line}`")));
        }
        let mut out = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (n, line) = self.next()?;
            let before = out.len();
            for s in line.split_whitespace() {
                out.push(s.parse::<f64>().map_err(|e| Error::parse(n, format!("{s}: {e}")))?);
            }
            if out.len() - before != cols {
                return Err(Error::parse(n, format!("expected {cols} values")));
            }
        }
        Ok(out)
    }
}

fn write_param<W: Write>(w: &mut W, name: &str, rows: usize, values: &[f64]) -> Result<()> {
    let cols = values.len() / rows.max(1);
    writeln!(w, "param {name} {rows} {cols}")?;
    for row in values.chunks(cols.max(1)) {
        let mut first = true;
        for x in row {
            if !first {
                w.write_all(b" ")?;
            }
            write!(w, "{x:e}")?;
            first = false;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_set_rejects_duplicates_in_either_order() {
        let p = |u, v, label| LabeledPair { u: NodeId(u), v: NodeId(v), label };
        assert!(LabeledPairSet::new(vec![p(0, 1, true), p(1, 2, false)]).is_ok());
        assert!(LabeledPairSet::new(vec![p(0, 1, true), p(1, 0, false)]).is_err());
        assert!(LabeledPairSet::new(vec![p(2, 2, true)]).is_err());
    }

    #[test]
    fn train_config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        assert!(TrainConfig { batch_size: 0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { validation_fraction: 1.0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { validation_fraction: 0.0, ..Default::default() }.validate().is_ok());
    }

    fn spec() -> FeatureSpec {
        FeatureSpec { type_names: vec!["a".into(), "b".into()], combiner: Combiner::Hadamard, segment_len: 3 }
    }

    #[test]
    fn logreg_model_file_round_trips() {
        let m = LogRegModel { weights: vec![0.1, -2.5, 1.0 / 3.0, 4e-300, 0.0, 7.0], bias: -0.25 };
        let art = ModelArtifact { spec: spec(), graph_hash: "feed".into(), model: FusionModel::LogReg(m) };
        let mut buf = Vec::new();
        art.write(&mut buf).unwrap();
        assert!(buf.starts_with(b"HETEDGE-MODEL v1\nkind logreg\n"));
        assert_eq!(ModelArtifact::read(&buf[..]).unwrap(), art);
    }

    #[test]
    fn mtn_model_file_round_trips() {
        let net = MultiTowerNet::init(MtnArch { input_lens: vec![3, 3], tower_width: 4, fusion_width: 2 }, 9).unwrap();
        let art = ModelArtifact { spec: spec(), graph_hash: String::new(), model: FusionModel::Mtn(net) };
        let mut buf = Vec::new();
        art.write(&mut buf).unwrap();
        let back = ModelArtifact::read(&buf[..]).unwrap();
        assert_eq!(back, art);
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn truncated_model_file_is_rejected() {
        let art = ModelArtifact {
            spec: spec(),
            graph_hash: String::new(),
            model: FusionModel::LogReg(LogRegModel::zeros(6)),
        };
        let mut buf = Vec::new();
        art.write(&mut buf).unwrap();
        buf.truncate(buf.len() - 10);
        assert!(ModelArtifact::read(&buf[..]).is_err());
    }
}
