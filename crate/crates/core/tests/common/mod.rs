//! Brute-force oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use hetedge::edgeops::FeatureSet;
use hetedge::fusion::MultiTowerNet;
use hetedge::graph::{EdgeSchema, MultiGraph, MultiGraphBuilder, NodeId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Pairwise AUC: every (positive, negative) pair scores 1, 1/2 or 0.
pub fn auc_pairwise(scores: &[f64], labels: &[bool]) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            count += 1;
            total += if si > sj {
                1.0
            } else if si == sj {
                0.5
            } else {
                0.0
            };
        }
    }
    total / count as f64
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let bb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if aa * bb == 0.0 {
        0.0
    } else {
        ab / (aa * bb)
    }
}

/// Full scan: cosine against every other row, sorted by similarity then id.
pub fn knn_full_scan(rows: &[Vec<f64>], q: usize, k: usize) -> Vec<(u32, f64)> {
    let mut all: Vec<(u32, f64)> =
        (0..rows.len()).filter(|&i| i != q).map(|i| (i as u32, cosine(&rows[q], &rows[i]))).collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// Relative error with a small floor so exact zeros compare cleanly.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Central difference of `f` at coordinate `i` of `x`.
pub fn central_diff(x: &mut [f64], i: usize, h: f64, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let orig = x[i];
    x[i] = orig + h;
    let up = f(x);
    x[i] = orig - h;
    let down = f(x);
    x[i] = orig;
    (up - down) / (2.0 * h)
}

/// A typed edge list with the adjacency worked out independently of the
/// library.
pub struct TypedFixture {
    pub n: usize,
    pub types: Vec<&'static str>,
    pub edges: Vec<(usize, usize, usize)>,
}

impl TypedFixture {
    /// `n` nodes, each type independently keeping every pair with
    /// probability `density`.
    pub fn random(n: usize, density: f64, seed: u64) -> Self {
        let mut r = rng(seed);
        let types = vec!["contact", "friend", "chat"];
        let mut edges = Vec::new();
        for t in 0..types.len() {
            for u in 0..n {
                for v in u + 1..n {
                    if r.gen_bool(density) {
                        edges.push((u, v, t));
                    }
                }
            }
        }
        TypedFixture { n, types, edges }
    }

    pub fn graph(&self) -> MultiGraph {
        let mut b = MultiGraphBuilder::new(EdgeSchema::default());
        for i in 0..self.n {
            b.add_node(&format!("v{i}")).unwrap();
        }
        for &(u, v, t) in &self.edges {
            b.add_edge(&format!("v{u}"), &format!("v{v}"), self.types[t]).unwrap();
        }
        b.build()
    }

    /// Neighbors of `u` by type.
    pub fn typed_neighbors(&self, u: usize) -> BTreeMap<usize, BTreeSet<usize>> {
        let mut out: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for &(a, b, t) in &self.edges {
            if a == u {
                out.entry(t).or_default().insert(b);
            } else if b == u {
                out.entry(t).or_default().insert(a);
            }
        }
        out
    }

    pub fn neighbors_of_type(&self, u: usize, t: usize) -> BTreeSet<usize> {
        self.typed_neighbors(u).remove(&t).unwrap_or_default()
    }

    /// Per-edge law: weight of `x` is the number of types joining `u` and `x`.
    pub fn hetero_law(&self, u: usize) -> BTreeMap<usize, f64> {
        let mut w: BTreeMap<usize, f64> = BTreeMap::new();
        for nb in self.typed_neighbors(u).values() {
            for &x in nb {
                *w.entry(x).or_default() += 1.0;
            }
        }
        normalize(w)
    }

    /// Per-type law: uniform over types present at `u`, then uniform within.
    pub fn uniformbias_law(&self, u: usize) -> BTreeMap<usize, f64> {
        let typed = self.typed_neighbors(u);
        let k = typed.len() as f64;
        let mut w: BTreeMap<usize, f64> = BTreeMap::new();
        for nb in typed.values() {
            for &x in nb {
                *w.entry(x).or_default() += 1.0 / k / nb.len() as f64;
            }
        }
        w
    }
}

pub fn normalize(w: BTreeMap<usize, f64>) -> BTreeMap<usize, f64> {
    let total: f64 = w.values().sum();
    w.into_iter().map(|(k, v)| (k, v / total)).collect()
}

/// Empirical law of `draw` over `samples` trials.
pub fn empirical(samples: usize, mut draw: impl FnMut() -> Option<NodeId>) -> BTreeMap<usize, f64> {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for _ in 0..samples {
        if let Some(x) = draw() {
            *counts.entry(x.index()).or_default() += 1.0;
        }
    }
    counts.into_iter().map(|(k, v)| (k, v / samples as f64)).collect()
}

/// Largest absolute difference between two laws over the union of supports.
pub fn max_law_gap(a: &BTreeMap<usize, f64>, b: &BTreeMap<usize, f64>) -> f64 {
    a.keys()
        .chain(b.keys())
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

/// Cached forward state of one example, used to re-evaluate the loss after a
/// single-parameter perturbation without a full forward pass.
struct MtnTrace {
    x: Vec<f64>,
    tower_pre: Vec<f64>,
    fusion_pre: Vec<f64>,
    logit: f64,
    label: f64,
}

fn log_loss(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Central-difference check of every multi-tower parameter. A perturbation
/// only changes the units downstream of it, so each side of the difference is
/// recomputed locally from cached pre-activations. Parameters whose `±h`
/// step flips a ReLU are skipped, since the loss has a kink there.
///
/// Returns (worst relative error, skipped, checked).
pub fn mtn_every_parameter(net: &MultiTowerNet, data: &FeatureSet, h: f64) -> (f64, usize, usize) {
    let relu = |v: f64| v.max(0.0);
    let idx: Vec<usize> = (0..data.len()).collect();
    let analytic = net.gradient(data, &idx);
    let (fusion, output) = (net.fusion(), net.output());
    let wf = net.weight(fusion);
    let wo = net.weight(output);
    let tw = net.arch().tower_width;
    let traces: Vec<MtnTrace> = idx
        .iter()
        .map(|&e| {
            let x = data.row(e).to_vec();
            let mut tower_pre = Vec::new();
            let mut start = 0;
            for t in 0..net.arch().num_towers() {
                let d = net.tower(t);
                let (w, b) = (net.weight(d), net.bias(d));
                for j in 0..d.outputs {
                    tower_pre.push(b[j] + (0..d.inputs).map(|i| w[j * d.inputs + i] * x[start + i]).sum::<f64>());
                }
                start += d.inputs;
            }
            let hidden: Vec<f64> = tower_pre.iter().map(|&v| relu(v)).collect();
            let fusion_pre: Vec<f64> = (0..fusion.outputs)
                .map(|j| net.bias(fusion)[j] + (0..fusion.inputs).map(|i| wf[j * fusion.inputs + i] * hidden[i]).sum::<f64>())
                .collect();
            let logit = net.bias(output)[0] + (0..output.inputs).map(|j| wo[j] * relu(fusion_pre[j])).sum::<f64>();
            MtnTrace { x, tower_pre, fusion_pre, logit, label: data.labels[e] as u8 as f64 }
        })
        .collect();

    // Perturbed logit of one example, or None when a ReLU flips.
    let perturbed = |tr: &MtnTrace, p: usize, delta: f64| -> Option<f64> {
        if p >= output.weight {
            return Some(if p >= output.bias { tr.logit + delta } else { tr.logit + delta * relu(tr.fusion_pre[p - output.weight]) });
        }
        if p >= fusion.weight {
            let (j, input) = if p >= fusion.bias {
                (p - fusion.bias, 1.0)
            } else {
                let k = p - fusion.weight;
                (k / fusion.inputs, relu(tr.tower_pre[k % fusion.inputs]))
            };
            let (z, z2) = (tr.fusion_pre[j], tr.fusion_pre[j] + delta * input);
            if (z > 0.0) != (z2 > 0.0) {
                return None;
            }
            return Some(tr.logit + wo[j] * (relu(z2) - relu(z)));
        }
        let mut start = 0;
        for t in 0..net.arch().num_towers() {
            let d = net.tower(t);
            if p < d.bias + d.outputs {
                let (k, input) = if p >= d.bias {
                    (p - d.bias, 1.0)
                } else {
                    let q = p - d.weight;
                    (q / d.inputs, tr.x[start + q % d.inputs])
                };
                let unit = t * tw + k;
                let (z, z2) = (tr.tower_pre[unit], tr.tower_pre[unit] + delta * input);
                if (z > 0.0) != (z2 > 0.0) {
                    return None;
                }
                let dh = relu(z2) - relu(z);
                let mut logit = tr.logit;
                for j in 0..fusion.outputs {
                    let (f, f2) = (tr.fusion_pre[j], tr.fusion_pre[j] + wf[j * fusion.inputs + unit] * dh);
                    if (f > 0.0) != (f2 > 0.0) {
                        return None;
                    }
                    logit += wo[j] * (relu(f2) - relu(f));
                }
                return Some(logit);
            }
            start += d.inputs;
        }
        unreachable!("parameter {p} outside the layout")
    };

    let n = traces.len() as f64;
    let (mut worst, mut skipped, mut checked) = (0.0f64, 0, 0);
    'params: for p in 0..net.params().len() {
        let mut diff = 0.0;
        for tr in &traces {
            let (Some(up), Some(down)) = (perturbed(tr, p, h), perturbed(tr, p, -h)) else {
                skipped += 1;
                continue 'params;
            };
            diff += log_loss(up, tr.label) - log_loss(down, tr.label);
        }
        worst = worst.max(rel_err(analytic[p], diff / n / (2.0 * h)));
        checked += 1;
    }
    (worst, skipped, checked)
}
