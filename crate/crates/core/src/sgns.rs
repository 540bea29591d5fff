//! Skip-gram with negative sampling over walk corpora.
//!
//! Each center/context pair within the window takes one SGD step on
//!
//! ```text
//! -log σ(u_c · v_o) - Σ_k log σ(-u_c · v_k)
//! ```
//!
//! where `u` rows live in the input matrix (the published node vectors), `v`
//! rows in the context matrix, and the `v_k` are drawn from the unigram
//! distribution raised to the 3/4 power.

use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Adjacency, HomogeneousGraph, NodeId, NodeLabels};
use crate::math::{axpy, dot, log_sigmoid, norm, sigmoid, LOGIT_CLAMP};
use crate::rng::rng_from;
use crate::walks::WalkCorpus;

const NOISE_POWER: f64 = 0.75;
const INIT_STREAM: u64 = 0x1417;
const TRAIN_STREAM: u64 = 0x7a17;

#[derive(Clone, Debug, PartialEq)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig { dim: 128, window: 10, negatives: 5, learning_rate: 0.01, epochs: 5, seed: 0 }
    }
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 || self.window < 1 || self.negatives < 1 {
            return Err(Error::InvalidConfig("sgns dim, window and negatives must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig("sgns learning_rate must be positive".into()));
        }
        Ok(())
    }
}

/// Noise distribution `P(v) ∝ count(v)^0.75` with O(1) alias sampling.
#[derive(Clone, Debug)]
pub struct NoiseDistribution {
    probs: Vec<f64>,
    accept: Vec<f64>,
    alias: Vec<u32>,
}

impl NoiseDistribution {
    pub fn from_corpus(corpus: &WalkCorpus) -> Result<Self> {
        let mut counts = vec![0u64; corpus.num_nodes];
        for walk in &corpus.walks {
            for v in walk {
                counts[v.index()] += 1;
            }
        }
        Self::from_counts(&counts)
    }

    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(NOISE_POWER)).collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptyCorpus);
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();

        // Vose's alias method.
        let n = probs.len();
        let mut scaled: Vec<f64> = probs.iter().map(|p| p * n as f64).collect();
        let mut accept = vec![1.0; n];
        let mut alias: Vec<u32> = (0..n as u32).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            accept[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in small.into_iter().chain(large) {
            accept[i] = 1.0;
        }
        Ok(NoiseDistribution { probs, accept, alias })
    }

    pub fn probability(&self, v: NodeId) -> f64 {
        self.probs[v.index()]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> NodeId {
        let i = rng.gen_range(0..self.accept.len());
        if rng.gen::<f64>() < self.accept[i] {
            NodeId::from(i)
        } else {
            NodeId(self.alias[i])
        }
    }
}

/// Per-type node vectors (input matrix) plus the context matrix used during
/// training.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    name: String,
    dim: usize,
    input: Vec<f64>,
    context: Vec<f64>,
    active: Vec<bool>,
}

impl EmbeddingTable {
    /// Table from explicit rows; every node is marked active.
    pub fn from_rows(name: impl Into<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 && !rows.is_empty() {
            return Err(Error::ShapeMismatch("embedding rows must be non-empty".into()));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::ShapeMismatch("embedding rows have different lengths".into()));
        }
        let n = rows.len();
        Ok(EmbeddingTable {
            name: name.into(),
            dim,
            input: rows.into_iter().flatten().collect(),
            context: vec![0.0; n * dim],
            active: vec![true; n],
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.active.len()
    }

    #[inline]
    pub fn row(&self, v: NodeId) -> &[f64] {
        &self.input[v.index() * self.dim..(v.index() + 1) * self.dim]
    }

    pub fn context_row(&self, v: NodeId) -> &[f64] {
        &self.context[v.index() * self.dim..(v.index() + 1) * self.dim]
    }

    /// Whether the node received training signal (appeared in a walk of
    /// length two or more).
    pub fn is_active(&self, v: NodeId) -> bool {
        self.active[v.index()]
    }

    /// Marks exactly the nodes with at least one edge in `g` as active.
    pub fn mark_active_from<G: Adjacency>(&mut self, g: &G) -> Result<()> {
        if g.num_nodes() != self.num_nodes() {
            return Err(Error::ShapeMismatch(format!(
                "table has {} rows, graph has {} nodes",
                self.num_nodes(),
                g.num_nodes()
            )));
        }
        for (i, a) in self.active.iter_mut().enumerate() {
            *a = g.degree_of(NodeId::from(i)) > 0;
        }
        Ok(())
    }

    fn all_finite(&self) -> bool {
        self.input.iter().chain(&self.context).all(|x| x.is_finite())
    }

    /// Text format: `N d` header, then `label v1 … vd` per node.
    pub fn write_text<W: Write>(&self, mut w: W, labels: &NodeLabels) -> Result<()> {
        if labels.len() != self.num_nodes() {
            return Err(Error::ShapeMismatch("label count differs from table rows".into()));
        }
        writeln!(w, "{} {}", self.num_nodes(), self.dim)?;
        for (id, label) in labels.iter() {
            w.write_all(label.as_bytes())?;
            for x in self.row(id) {
                write!(w, " {x:e}")?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reads the text format back. Rows may appear in any order but every
    /// label in `labels` must be present exactly once. Context rows are zero
    /// and all nodes are marked active; see [`mark_active_from`](Self::mark_active_from).
    pub fn read_text<R: BufRead>(r: R, labels: &NodeLabels, name: impl Into<String>) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::artifact("embedding", "empty file"))??;
        let mut it = header.split_whitespace().map(str::parse::<usize>);
        let (n, dim) = match (it.next(), it.next(), it.next()) {
            (Some(Ok(n)), Some(Ok(d)), None) => (n, d),
            _ => return Err(Error::parse(1, "expected `N d` header")),
        };
        if n != labels.len() {
            return Err(Error::artifact("embedding", format!("{n} rows but graph has {} nodes", labels.len())));
        }
        let mut input = vec![0.0; n * dim];
        let mut seen = vec![false; n];
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let label = fields.next().unwrap_or_default();
            let id = labels.get(label).ok_or_else(|| Error::parse(line_no, format!("unknown node `{label}`")))?;
            if std::mem::replace(&mut seen[id.index()], true) {
                return Err(Error::parse(line_no, format!("duplicate row for `{label}`")));
            }
            let values = fields
                .map(|s| s.parse::<f64>().map_err(|e| Error::parse(line_no, format!("{s}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if values.len() != dim {
                return Err(Error::parse(line_no, format!("expected {dim} values, found {}", values.len())));
            }
            input[id.index() * dim..(id.index() + 1) * dim].copy_from_slice(&values);
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::artifact("embedding", format!("no row for `{}`", labels.label(NodeId::from(missing)))));
        }
        Ok(EmbeddingTable { name: name.into(), dim, input, context: vec![0.0; n * dim], active: vec![true; n] })
    }
}

#[inline]
fn clamped_dot(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-LOGIT_CLAMP, LOGIT_CLAMP)
}

/// Loss of one center/context pair with the given negative context rows.
pub fn pair_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    -log_sigmoid(clamped_dot(center, context))
        - negatives.iter().map(|n| log_sigmoid(-clamped_dot(center, n))).sum::<f64>()
}

/// Analytic gradients of [`pair_loss`].
#[derive(Clone, Debug, PartialEq)]
pub struct PairGradient {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn pair_gradient(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> PairGradient {
    let mut g_center = vec![0.0; center.len()];
    // d/dx [-log σ(x)] = σ(x) - 1
    let pos = sigmoid(dot(center, context)) - 1.0;
    axpy(pos, context, &mut g_center);
    let g_context = center.iter().map(|c| pos * c).collect();
    let mut g_negs = Vec::with_capacity(negatives.len());
    for n in negatives {
        // d/dx [-log σ(-x)] = σ(x)
        let s = sigmoid(dot(center, n));
        axpy(s, n, &mut g_center);
        g_negs.push(center.iter().map(|c| s * c).collect());
    }
    PairGradient { loss: pair_loss(center, context, negatives), center: g_center, context: g_context, negatives: g_negs }
}

/// Loss diagnostics collected during training.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SgnsStats {
    /// Number of center/context pairs visited per epoch.
    pub pairs_per_epoch: usize,
    /// Mean pair loss per epoch.
    pub epoch_loss: Vec<f64>,
    /// Mean pair loss over the first and last tenth of the first epoch
    /// (single-threaded mode only).
    pub first_epoch_head: f64,
    pub first_epoch_tail: f64,
}

/// Row storage the SGD kernel reads and writes.
trait Params {
    fn load_input(&mut self, row: usize, out: &mut [f64]);
    fn add_input(&mut self, row: usize, delta: &[f64]);
    fn load_context(&mut self, row: usize, out: &mut [f64]);
    fn store_context(&mut self, row: usize, value: &[f64]);
}

struct Dense<'a> {
    dim: usize,
    input: &'a mut [f64],
    context: &'a mut [f64],
}

impl Params for Dense<'_> {
    #[inline]
    fn load_input(&mut self, row: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.input[row * self.dim..(row + 1) * self.dim]);
    }
    #[inline]
    fn add_input(&mut self, row: usize, delta: &[f64]) {
        axpy(1.0, delta, &mut self.input[row * self.dim..(row + 1) * self.dim]);
    }
    #[inline]
    fn load_context(&mut self, row: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.context[row * self.dim..(row + 1) * self.dim]);
    }
    #[inline]
    fn store_context(&mut self, row: usize, value: &[f64]) {
        self.context[row * self.dim..(row + 1) * self.dim].copy_from_slice(value);
    }
}

/// Lock-free shared storage: relaxed atomic loads and stores, last write wins
/// on overlapping rows.
#[derive(Clone, Copy)]
struct Shared<'a> {
    dim: usize,
    input: &'a [AtomicU64],
    context: &'a [AtomicU64],
}

impl Params for Shared<'_> {
    fn load_input(&mut self, row: usize, out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(&self.input[row * self.dim..]) {
            *o = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }
    fn add_input(&mut self, row: usize, delta: &[f64]) {
        for (d, a) in delta.iter().zip(&self.input[row * self.dim..]) {
            let cur = f64::from_bits(a.load(Ordering::Relaxed));
            a.store((cur + d).to_bits(), Ordering::Relaxed);
        }
    }
    fn load_context(&mut self, row: usize, out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(&self.context[row * self.dim..]) {
            *o = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }
    fn store_context(&mut self, row: usize, value: &[f64]) {
        for (v, a) in value.iter().zip(&self.context[row * self.dim..]) {
            a.store(v.to_bits(), Ordering::Relaxed);
        }
    }
}

struct Scratch {
    center: Vec<f64>,
    grad: Vec<f64>,
    ctx: Vec<f64>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Scratch { center: vec![0.0; dim], grad: vec![0.0; dim], ctx: vec![0.0; dim] }
    }
}

/// One SGD step for `center` against `context` plus freshly drawn negatives.
/// Returns the pair loss before the update.
#[inline]
fn sgd_pair<P: Params, R: Rng>(
    params: &mut P,
    s: &mut Scratch,
    noise: &NoiseDistribution,
    cfg: &SgnsConfig,
    center: NodeId,
    context: NodeId,
    rng: &mut R,
) -> f64 {
    let lr = cfg.learning_rate;
    params.load_input(center.index(), &mut s.center);
    s.grad.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;
    for k in 0..=cfg.negatives {
        let (target, label) = if k == 0 {
            (context, 1.0)
        } else {
            let n = noise.sample(rng);
            if n == context {
                continue;
            }
            (n, 0.0)
        };
        params.load_context(target.index(), &mut s.ctx);
        let x = clamped_dot(&s.center, &s.ctx);
        loss -= if label > 0.0 { log_sigmoid(x) } else { log_sigmoid(-x) };
        // Descent direction on the logit.
        let g = label - sigmoid(x);
        axpy(g, &s.ctx, &mut s.grad);
        axpy(lr * g, &s.center, &mut s.ctx);
        params.store_context(target.index(), &s.ctx);
    }
    s.grad.iter_mut().for_each(|g| *g *= lr);
    params.add_input(center.index(), &s.grad);
    loss
}

/// Runs the window over one walk. Returns (loss sum, pair count).
fn train_walk<P: Params, R: Rng>(
    params: &mut P,
    s: &mut Scratch,
    noise: &NoiseDistribution,
    cfg: &SgnsConfig,
    walk: &[NodeId],
    rng: &mut R,
    per_pair: &mut impl FnMut(f64),
) -> (f64, usize) {
    let mut loss = 0.0;
    let mut pairs = 0;
    for (i, &center) in walk.iter().enumerate() {
        let lo = i.saturating_sub(cfg.window);
        let hi = (i + cfg.window).min(walk.len() - 1);
        for (j, &context) in walk.iter().enumerate().take(hi + 1).skip(lo) {
            if j == i {
                continue;
            }
            let l = sgd_pair(params, s, noise, cfg, center, context, rng);
            per_pair(l);
            loss += l;
            pairs += 1;
        }
    }
    (loss, pairs)
}

fn count_pairs(corpus: &WalkCorpus, window: usize) -> usize {
    corpus
        .walks
        .iter()
        .map(|w| (0..w.len()).map(|i| (i + window).min(w.len() - 1) - i.saturating_sub(window)).sum::<usize>())
        .sum()
}

/// Trains a table in deterministic single-threaded mode.
pub fn train_sgns(corpus: &WalkCorpus, cfg: &SgnsConfig) -> Result<EmbeddingTable> {
    train_sgns_with_stats(corpus, cfg, 1).map(|(t, _)| t)
}

/// Trains a table. With `threads > 1` walks are processed concurrently with
/// unsynchronized row updates, so results vary from run to run.
pub fn train_sgns_with_stats(
    corpus: &WalkCorpus,
    cfg: &SgnsConfig,
    threads: usize,
) -> Result<(EmbeddingTable, SgnsStats)> {
    cfg.validate()?;
    let noise = NoiseDistribution::from_corpus(corpus)?;
    let n = corpus.num_nodes;
    let dim = cfg.dim;

    let mut init_rng = rng_from(cfg.seed, &[INIT_STREAM]);
    let bound = 0.5 / dim as f64;
    let mut input: Vec<f64> = (0..n * dim).map(|_| init_rng.gen_range(-bound..=bound)).collect();
    let mut context = vec![0.0; n * dim];

    let mut active = vec![false; n];
    for walk in corpus.walks.iter().filter(|w| w.len() > 1) {
        for v in walk {
            active[v.index()] = true;
        }
    }

    let total_pairs = count_pairs(corpus, cfg.window);
    let mut stats = SgnsStats { pairs_per_epoch: total_pairs, ..Default::default() };
    let tenth = (total_pairs / 10).max(1);

    if threads <= 1 {
        let mut params = Dense { dim, input: &mut input, context: &mut context };
        let mut scratch = Scratch::new(dim);
        for epoch in 0..cfg.epochs {
            let mut rng = rng_from(cfg.seed, &[TRAIN_STREAM, epoch as u64]);
            let mut seen = 0usize;
            let (mut head, mut tail) = (0.0, 0.0);
            let tail_start = total_pairs.saturating_sub(tenth);
            let mut per_pair = |l: f64| {
                if epoch == 0 {
                    if seen < tenth {
                        head += l;
                    }
                    if seen >= tail_start {
                        tail += l;
                    }
                }
                seen += 1;
            };
            let mut epoch_loss = 0.0;
            for walk in &corpus.walks {
                let (l, _) = train_walk(&mut params, &mut scratch, &noise, cfg, walk, &mut rng, &mut per_pair);
                if !l.is_finite() {
                    return Err(Error::NonFinite(format!("sgns loss became {l} in epoch {epoch}")));
                }
                epoch_loss += l;
            }
            if epoch == 0 {
                stats.first_epoch_head = head / tenth.min(total_pairs).max(1) as f64;
                stats.first_epoch_tail = tail / tenth.min(total_pairs).max(1) as f64;
            }
            stats.epoch_loss.push(epoch_loss / total_pairs.max(1) as f64);
        }
    } else {
        let to_atomic = |v: &[f64]| v.iter().map(|x| AtomicU64::new(x.to_bits())).collect::<Vec<_>>();
        let shared_in = to_atomic(&input);
        let shared_ctx = to_atomic(&context);
        let shared = Shared { dim, input: &shared_in, context: &shared_ctx };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let chunk = corpus.walks.len().div_ceil(threads * 4).max(1);
        for epoch in 0..cfg.epochs {
            let loss: f64 = pool.install(|| {
                corpus
                    .walks
                    .par_chunks(chunk)
                    .enumerate()
                    .map(|(ci, walks)| {
                        let mut params = shared;
                        let mut scratch = Scratch::new(dim);
                        let mut rng = rng_from(cfg.seed, &[TRAIN_STREAM, epoch as u64, ci as u64]);
                        walks
                            .iter()
                            .map(|w| train_walk(&mut params, &mut scratch, &noise, cfg, w, &mut rng, &mut |_| {}).0)
                            .sum::<f64>()
                    })
                    .sum()
            });
            if !loss.is_finite() {
                return Err(Error::NonFinite(format!("sgns loss became {loss} in epoch {epoch}")));
            }
            stats.epoch_loss.push(loss / total_pairs.max(1) as f64);
        }
        input = shared_in.iter().map(|a| f64::from_bits(a.load(Ordering::Relaxed))).collect();
        context = shared_ctx.iter().map(|a| f64::from_bits(a.load(Ordering::Relaxed))).collect();
    }

    let table = EmbeddingTable { name: String::new(), dim, input, context, active };
    if !table.all_finite() {
        return Err(Error::NonFinite("sgns produced non-finite parameters".into()));
    }
    Ok((table, stats))
}

/// Cosine similarity between two rows. `degenerate` is set when either row is
/// the zero vector, in which case the value is 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cosine {
    pub value: f64,
    pub degenerate: bool,
}

pub fn cosine(table: &EmbeddingTable, a: NodeId, b: NodeId) -> Result<Cosine> {
    for v in [a, b] {
        if v.index() >= table.num_nodes() {
            return Err(Error::NodeOutOfRange { id: v.index(), num_nodes: table.num_nodes() });
        }
    }
    Ok(cosine_of(table.row(a), table.row(b)))
}

pub fn cosine_of(x: &[f64], y: &[f64]) -> Cosine {
    let (nx, ny) = (norm(x), norm(y));
    if nx == 0.0 || ny == 0.0 {
        return Cosine { value: 0.0, degenerate: true };
    }
    Cosine { value: (dot(x, y) / (nx * ny)).clamp(-1.0, 1.0), degenerate: false }
}

/// Builds a table for every node of `g` where nodes with no edges keep their
/// initial row and are flagged inactive.
pub fn train_on_graph(corpus: &WalkCorpus, cfg: &SgnsConfig, g: &HomogeneousGraph) -> Result<EmbeddingTable> {
    let mut t = train_sgns(corpus, cfg)?;
    t.mark_active_from(g)?;
    t.set_name(g.name());
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walks::WalkStrategy;

    fn corpus(walks: Vec<Vec<u32>>, n: usize) -> WalkCorpus {
        WalkCorpus {
            walks: walks.into_iter().map(|w| w.into_iter().map(NodeId).collect()).collect(),
            num_nodes: n,
            strategy: WalkStrategy::Uniform,
            seed: 0,
            graph_hash: String::new(),
        }
    }

    #[test]
    fn equal_counts_give_uniform_noise() {
        let c = corpus(vec![vec![0, 1, 2, 3], vec![3, 2, 1, 0]], 4);
        let noise = NoiseDistribution::from_corpus(&c).unwrap();
        for v in 0..4 {
            assert!((noise.probability(NodeId(v)) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn noise_ratio_follows_three_quarter_power() {
        let noise = NoiseDistribution::from_counts(&[16, 1]).unwrap();
        assert!((noise.probability(NodeId(0)) / noise.probability(NodeId(1)) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(NoiseDistribution::from_corpus(&corpus(vec![], 3)), Err(Error::EmptyCorpus)));
        assert!(matches!(NoiseDistribution::from_counts(&[]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn unseen_nodes_are_never_sampled() {
        let noise = NoiseDistribution::from_counts(&[0, 5, 0, 1]).unwrap();
        let mut rng = rng_from(3, &[]);
        for _ in 0..10_000 {
            let v = noise.sample(&mut rng);
            assert!(v == NodeId(1) || v == NodeId(3));
        }
    }

    #[test]
    fn initial_loss_with_zero_context_is_closed_form() {
        let center = [0.3, -0.2, 0.1];
        let zero = [0.0; 3];
        let negs: Vec<&[f64]> = vec![&zero; 5];
        let expected = -(0.5f64).ln() - 5.0 * (0.5f64).ln();
        assert!((pair_loss(&center, &zero, &negs) - expected).abs() < 1e-15);
    }

    #[test]
    fn output_shape_covers_unvisited_nodes() {
        let c = corpus(vec![vec![0, 1, 0, 1]], 5);
        let cfg = SgnsConfig { dim: 4, epochs: 1, ..Default::default() };
        let t = train_sgns(&c, &cfg).unwrap();
        assert_eq!(t.num_nodes(), 5);
        assert_eq!(t.dim(), 4);
        assert!(t.is_active(NodeId(0)) && !t.is_active(NodeId(4)));
        for v in 0..5 {
            assert!(t.row(NodeId(v)).iter().all(|x| x.abs() <= 0.5 / 4.0 + 1.0));
        }
    }

    #[test]
    fn cosine_edge_cases() {
        let t = EmbeddingTable::from_rows(
            "t",
            vec![vec![1.0, 2.0], vec![-2.0, 1.0], vec![-1.0, -2.0], vec![0.0, 0.0]],
        )
        .unwrap();
        assert!((cosine(&t, NodeId(0), NodeId(0)).unwrap().value - 1.0).abs() < 1e-15);
        assert!(cosine(&t, NodeId(0), NodeId(1)).unwrap().value.abs() < 1e-15);
        assert!((cosine(&t, NodeId(0), NodeId(2)).unwrap().value + 1.0).abs() < 1e-15);
        let z = cosine(&t, NodeId(0), NodeId(3)).unwrap();
        assert_eq!(z, Cosine { value: 0.0, degenerate: true });
        assert!(cosine(&t, NodeId(0), NodeId(9)).is_err());
    }

    #[test]
    fn text_format_round_trips() {
        let mut b = crate::graph::MultiGraphBuilder::new(crate::graph::EdgeSchema::default());
        b.add_edge("a", "b", "friend").unwrap();
        let g = b.build();
        let t = EmbeddingTable::from_rows("friend", vec![vec![0.1, -1e-300], vec![3.0, 1.0 / 3.0]]).unwrap();
        let mut buf = Vec::new();
        t.write_text(&mut buf, g.labels()).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("2 2\n"));
        let back = EmbeddingTable::read_text(&buf[..], g.labels(), "friend").unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn config_validation() {
        assert!(SgnsConfig::default().validate().is_ok());
        assert!(SgnsConfig { dim: 0, ..Default::default() }.validate().is_err());
        assert!(SgnsConfig { learning_rate: 0.0, ..Default::default() }.validate().is_err());
        assert!(SgnsConfig { negatives: 0, ..Default::default() }.validate().is_err());
    }
}
