//! Temporal-split evaluation: dataset construction, AUC and Precision@k.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fusion::{LabeledPair, LabeledPairSet};
use crate::graph::{EdgeType, MultiGraph, NodeId, NodeLabels};

/// Area under the ROC curve as the Mann-Whitney statistic: the fraction of
/// (positive, negative) pairs where the positive scores higher, ties counted
/// one half. Computed from average ranks in O(n log n).
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::NonFinite(format!("score {i} is NaN")));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of 1-based average ranks of the positives.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        let pos_in_block = order[i..j].iter().filter(|&&k| labels[k]).count();
        rank_sum += avg_rank * pos_in_block as f64;
        i = j;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// One user's candidates, best first.
#[derive(Clone, Debug, PartialEq)]
pub struct UserRanking {
    pub user: NodeId,
    pub candidates: Vec<(NodeId, f64)>,
}

/// Mean over users of `hits in top k / min(k, list length)`. Users with no
/// candidates are skipped.
pub fn precision_at_k(rankings: &[UserRanking], truth: &HashMap<NodeId, HashSet<NodeId>>, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let empty = HashSet::new();
    let mut total = 0.0;
    let mut users = 0usize;
    for r in rankings {
        if r.candidates.windows(2).any(|w| w[0].1 < w[1].1) {
            return Err(Error::UnsortedRanking(r.user.index()));
        }
        if r.candidates.is_empty() {
            continue;
        }
        let positives = truth.get(&r.user).unwrap_or(&empty);
        let top = k.min(r.candidates.len());
        let hits = r.candidates[..top].iter().filter(|(c, _)| positives.contains(c)).count();
        total += hits as f64 / top as f64;
        users += 1;
    }
    if users == 0 {
        return Err(Error::NoUsers);
    }
    Ok(total / users as f64)
}

/// Groups scored pairs by each endpoint and sorts every user's candidates by
/// descending score (ties by candidate id). Only users in `keep` are kept
/// when it is given.
pub fn rankings_by_user(
    pairs: &[(NodeId, NodeId)],
    scores: &[f64],
    keep: Option<&HashSet<NodeId>>,
) -> Vec<UserRanking> {
    let mut by_user: BTreeMap<NodeId, Vec<(NodeId, f64)>> = BTreeMap::new();
    for (&(u, v), &s) in pairs.iter().zip(scores) {
        for (user, cand) in [(u, v), (v, u)] {
            if keep.is_none_or(|k| k.contains(&user)) {
                by_user.entry(user).or_default().push((cand, s));
            }
        }
    }
    by_user
        .into_iter()
        .map(|(user, mut candidates)| {
            candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            UserRanking { user, candidates }
        })
        .collect()
}

/// Symmetric positive sets per user.
pub fn truth_by_user(positives: impl IntoIterator<Item = (NodeId, NodeId)>) -> HashMap<NodeId, HashSet<NodeId>> {
    let mut truth: HashMap<NodeId, HashSet<NodeId>> = HashMap::new();
    for (u, v) in positives {
        truth.entry(u).or_default().insert(v);
        truth.entry(v).or_default().insert(u);
    }
    truth
}

/// Pre-period graph plus labeled post-period pairs.
#[derive(Clone, Debug)]
pub struct TemporalSplit {
    pub graph: MultiGraph,
    pub target: EdgeType,
    pub positives: Vec<(NodeId, NodeId)>,
    pub negatives: Vec<(NodeId, NodeId)>,
}

fn canonical(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Builds the evaluation split. `post_edges` become positives (deduplicated);
/// `neg_count` negatives are drawn uniformly from unordered pairs that carry
/// no target-type edge in either period. Edges of other types do not
/// disqualify a pair.
pub fn temporal_split<R: Rng + ?Sized>(
    pre_graph: MultiGraph,
    target: EdgeType,
    post_edges: &[(NodeId, NodeId)],
    neg_count: usize,
    rng: &mut R,
) -> Result<TemporalSplit> {
    if target.index() >= pre_graph.num_types() {
        return Err(Error::UnknownEdgeType(format!("#{}", target.0)));
    }
    let n = pre_graph.num_nodes();
    let labels = pre_graph.labels();
    let mut positive_set = HashSet::new();
    let mut positives = Vec::new();
    for &(u, v) in post_edges {
        pre_graph.check_node(u)?;
        pre_graph.check_node(v)?;
        if u == v {
            return Err(Error::InvalidConfig(format!("post-period self-pair on `{}`", labels.label(u))));
        }
        if pre_graph.has_edge(u, v, target) {
            return Err(Error::PositiveInPreGraph(labels.label(u).into(), labels.label(v).into()));
        }
        let key = canonical(u, v);
        if positive_set.insert(key) {
            positives.push(key);
        }
    }

    let total = n * n.saturating_sub(1) / 2;
    let available = total - pre_graph.edge_count(target) - positives.len();
    if neg_count > available {
        return Err(Error::NotEnoughNonEdges { requested: neg_count, available });
    }
    let eligible = |a: NodeId, b: NodeId| !pre_graph.has_edge(a, b, target) && !positive_set.contains(&(a, b));

    let negatives = if neg_count * 2 <= available {
        let mut drawn = HashSet::with_capacity(neg_count);
        let mut out = Vec::with_capacity(neg_count);
        while out.len() < neg_count {
            let a = NodeId::from(rng.gen_range(0..n));
            let b = NodeId::from(rng.gen_range(0..n));
            if a == b {
                continue;
            }
            let key = canonical(a, b);
            if eligible(key.0, key.1) && drawn.insert(key) {
                out.push(key);
            }
        }
        out
    } else {
        // Dense regime: enumerate and shuffle.
        let mut all: Vec<(NodeId, NodeId)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (NodeId::from(a), NodeId::from(b))))
            .filter(|&(a, b)| eligible(a, b))
            .collect();
        all.shuffle(rng);
        all.truncate(neg_count);
        all
    };
    Ok(TemporalSplit { graph: pre_graph, target, positives, negatives })
}

impl TemporalSplit {
    pub fn labeled_pairs(&self) -> LabeledPairSet {
        let pairs = self
            .positives
            .iter()
            .map(|&(u, v)| LabeledPair { u, v, label: true })
            .chain(self.negatives.iter().map(|&(u, v)| LabeledPair { u, v, label: false }))
            .collect();
        LabeledPairSet::new(pairs).expect("positives and negatives are disjoint and deduplicated")
    }

    /// Random split into (train, test) with `test_fraction` of each class in
    /// the test set.
    pub fn partition<R: Rng + ?Sized>(&self, test_fraction: f64, rng: &mut R) -> Result<(LabeledPairSet, LabeledPairSet)> {
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(Error::InvalidConfig("test fraction must be in [0, 1)".into()));
        }
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (pairs, label) in [(&self.positives, true), (&self.negatives, false)] {
            let mut shuffled = pairs.clone();
            shuffled.shuffle(rng);
            let n_test = (shuffled.len() as f64 * test_fraction).round() as usize;
            for (i, (u, v)) in shuffled.into_iter().enumerate() {
                let p = LabeledPair { u, v, label };
                if i < n_test {
                    test.push(p);
                } else {
                    train.push(p);
                }
            }
        }
        Ok((LabeledPairSet::new(train)?, LabeledPairSet::new(test)?))
    }
}

/// One scored pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub u: NodeId,
    pub v: NodeId,
    pub label: bool,
    pub score: f64,
}

/// `u v label score` per line.
pub fn write_predictions<W: Write>(mut w: W, labels: &NodeLabels, preds: &[Prediction]) -> Result<()> {
    for p in preds {
        writeln!(w, "{} {} {} {:e}", labels.label(p.u), labels.label(p.v), p.label as u8, p.score)?;
    }
    Ok(())
}

pub fn read_predictions<R: BufRead>(r: R, labels: &NodeLabels) -> Result<Vec<Prediction>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let [u, v, label, score] = f.as_slice() else {
            return Err(Error::parse(i + 1, "expected `u v label score`"));
        };
        let label = match *label {
            "1" => true,
            "0" => false,
            other => return Err(Error::parse(i + 1, format!("label must be 0 or 1, found `{other}`"))),
        };
        out.push(Prediction {
            u: labels.require(u)?,
            v: labels.require(v)?,
            label,
            score: score.parse().map_err(|_| Error::parse(i + 1, format!("bad score `{score}`")))?,
        });
    }
    Ok(out)
}

/// Ordered `key = value` metrics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsReport {
    pub entries: Vec<(String, String)>,
}

impl MetricsReport {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.entries {
            writeln!(w, "{k} = {v}")?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut report = MetricsReport::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(" = ").ok_or_else(|| Error::parse(i + 1, "expected `key = value`"))?;
            report.push(k.trim(), v.trim());
        }
        Ok(report)
    }
}
