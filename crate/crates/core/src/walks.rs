//! Random-walk corpora over homogeneous graphs and typed multi-graphs.
//!
//! Four strategies are supported:
//!
//! * `uniform` picks a neighbor uniformly at random (DeepWalk).
//! * `node2vec` applies the second-order return/in-out bias controlled by
//!   `p` and `q`.
//! * `hetero` picks uniformly among all incident multi-edges, so a neighbor
//!   joined by `m` edge types is `m` times as likely.
//! * `uniformbias` first picks an edge type uniformly among the types present
//!   at the current node, then a uniform neighbor of that type.
//!
//! Walks stop early at nodes without neighbors. Corpus generation draws every
//! walk from its own RNG stream keyed by `(seed, node, walk index)`, so the
//! corpus is identical whatever the thread count.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Adjacency, HomogeneousGraph, MultiGraph, NodeId, NodeLabels};
use crate::rng::rng_from;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WalkStrategy {
    Uniform,
    Node2Vec,
    Hetero,
    UniformBias,
}

impl WalkStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            WalkStrategy::Uniform => "uniform",
            WalkStrategy::Node2Vec => "node2vec",
            WalkStrategy::Hetero => "hetero",
            WalkStrategy::UniformBias => "uniformbias",
        }
    }
}

impl fmt::Display for WalkStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WalkStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "deepwalk" => Ok(WalkStrategy::Uniform),
            "node2vec" => Ok(WalkStrategy::Node2Vec),
            "hetero" => Ok(WalkStrategy::Hetero),
            "uniformbias" => Ok(WalkStrategy::UniformBias),
            other => Err(Error::InvalidConfig(format!("unknown walk strategy `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkConfig {
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub strategy: WalkStrategy,
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig { walks_per_node: 10, walk_length: 30, strategy: WalkStrategy::Uniform, p: 1.0, q: 1.0, seed: 0 }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walk_length < 1 {
            return Err(Error::InvalidConfig("walk_length must be at least 1".into()));
        }
        if !(self.p > 0.0) || !(self.q > 0.0) {
            return Err(Error::InvalidConfig("node2vec p and q must be positive".into()));
        }
        Ok(())
    }
}

#[inline]
fn pick<R: Rng + ?Sized>(nbrs: &[NodeId], rng: &mut R) -> NodeId {
    nbrs[rng.gen_range(0..nbrs.len())]
}

/// Uniform first-order walk of at most `len` nodes starting at `start`.
pub fn uniform_walk<G, R>(g: &G, start: NodeId, len: usize, rng: &mut R) -> Vec<NodeId>
where
    G: Adjacency + ?Sized,
    R: Rng + ?Sized,
{
    let mut walk = Vec::with_capacity(len);
    walk.push(start);
    let mut cur = start;
    while walk.len() < len {
        let nbrs = g.neighbors(cur);
        if nbrs.is_empty() {
            break;
        }
        cur = pick(nbrs, rng);
        walk.push(cur);
    }
    walk
}

/// Unnormalized second-order weight of stepping `cur -> next` after arriving
/// from `prev`.
#[inline]
pub fn node2vec_weight<G: Adjacency + ?Sized>(g: &G, prev: NodeId, next: NodeId, p: f64, q: f64) -> f64 {
    if next == prev {
        1.0 / p
    } else if g.has_edge(prev, next) {
        1.0
    } else {
        1.0 / q
    }
}

/// One biased step from `cur`, having arrived from `prev`. Returns `None` at
/// a dead end.
pub fn node2vec_step<G, R>(g: &G, prev: NodeId, cur: NodeId, p: f64, q: f64, rng: &mut R) -> Option<NodeId>
where
    G: Adjacency + ?Sized,
    R: Rng + ?Sized,
{
    let nbrs = g.neighbors(cur);
    if nbrs.is_empty() {
        return None;
    }
    if p == 1.0 && q == 1.0 {
        return Some(pick(nbrs, rng));
    }
    let total: f64 = nbrs.iter().map(|&x| node2vec_weight(g, prev, x, p, q)).sum();
    if !(total > 0.0) || !total.is_finite() {
        return Some(pick(nbrs, rng));
    }
    let mut r = rng.gen::<f64>() * total;
    for &x in nbrs {
        let w = node2vec_weight(g, prev, x, p, q);
        if r < w {
            return Some(x);
        }
        r -= w;
    }
    // Rounding left a sliver of mass past the last candidate.
    nbrs.iter().rev().copied().find(|&x| node2vec_weight(g, prev, x, p, q) > 0.0)
}

/// Second-order biased walk. The first step is uniform.
pub fn node2vec_walk<G, R>(g: &G, start: NodeId, len: usize, p: f64, q: f64, rng: &mut R) -> Vec<NodeId>
where
    G: Adjacency + ?Sized,
    R: Rng + ?Sized,
{
    let mut walk = Vec::with_capacity(len);
    walk.push(start);
    if len < 2 {
        return walk;
    }
    let first = g.neighbors(start);
    if first.is_empty() {
        return walk;
    }
    walk.push(pick(first, rng));
    while walk.len() < len {
        let prev = walk[walk.len() - 2];
        let cur = walk[walk.len() - 1];
        match node2vec_step(g, prev, cur, p, q, rng) {
            Some(next) => walk.push(next),
            None => break,
        }
    }
    walk
}

/// One equal-probability-per-edge step on a multi-graph.
pub fn hetero_step<R: Rng + ?Sized>(g: &MultiGraph, cur: NodeId, rng: &mut R) -> Option<NodeId> {
    let total = g.total_degree(cur);
    if total == 0 {
        return None;
    }
    let mut r = rng.gen_range(0..total);
    for t in g.schema().types() {
        let nbrs = g.neighbors(cur, t);
        if r < nbrs.len() {
            return Some(nbrs[r]);
        }
        r -= nbrs.len();
    }
    unreachable!("index below total degree")
}

/// Walk that treats every typed edge as equally likely.
pub fn hetero_walk<R: Rng + ?Sized>(g: &MultiGraph, start: NodeId, len: usize, rng: &mut R) -> Vec<NodeId> {
    let mut walk = Vec::with_capacity(len);
    walk.push(start);
    let mut cur = start;
    while walk.len() < len {
        match hetero_step(g, cur, rng) {
            Some(next) => {
                walk.push(next);
                cur = next;
            }
            None => break,
        }
    }
    walk
}

/// One equal-probability-per-type step: a type is drawn uniformly among the
/// types with at least one edge at `cur`, then a uniform neighbor of it.
pub fn uniformbias_step<R: Rng + ?Sized>(g: &MultiGraph, cur: NodeId, rng: &mut R) -> Option<NodeId> {
    let present = g.schema().types().filter(|&t| !g.neighbors(cur, t).is_empty()).count();
    if present == 0 {
        return None;
    }
    let chosen = rng.gen_range(0..present);
    let t = g
        .schema()
        .types()
        .filter(|&t| !g.neighbors(cur, t).is_empty())
        .nth(chosen)
        .expect("chosen index below present-type count");
    Some(pick(g.neighbors(cur, t), rng))
}

pub fn uniformbias_walk<R: Rng + ?Sized>(g: &MultiGraph, start: NodeId, len: usize, rng: &mut R) -> Vec<NodeId> {
    let mut walk = Vec::with_capacity(len);
    walk.push(start);
    let mut cur = start;
    while walk.len() < len {
        match uniformbias_step(g, cur, rng) {
            Some(next) => {
                walk.push(next);
                cur = next;
            }
            None => break,
        }
    }
    walk
}

/// Graph a corpus is generated from.
///
/// Multi-graph strategies on a homogeneous graph reduce to the uniform walk;
/// homogeneous strategies on a multi-graph walk its flattened union.
#[derive(Clone, Copy, Debug)]
pub enum WalkGraph<'a> {
    Homogeneous(&'a HomogeneousGraph),
    Multi(&'a MultiGraph),
}

impl<'a> From<&'a HomogeneousGraph> for WalkGraph<'a> {
    fn from(g: &'a HomogeneousGraph) -> Self {
        WalkGraph::Homogeneous(g)
    }
}

impl<'a> From<&'a MultiGraph> for WalkGraph<'a> {
    fn from(g: &'a MultiGraph) -> Self {
        WalkGraph::Multi(g)
    }
}

impl WalkGraph<'_> {
    pub fn num_nodes(&self) -> usize {
        match self {
            WalkGraph::Homogeneous(g) => g.num_nodes(),
            WalkGraph::Multi(g) => g.num_nodes(),
        }
    }

    pub fn fingerprint(&self) -> String {
        match self {
            WalkGraph::Homogeneous(g) => g.fingerprint(),
            WalkGraph::Multi(g) => g.fingerprint(),
        }
    }
}

/// Node sequences plus the provenance needed to reproduce them.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkCorpus {
    pub walks: Vec<Vec<NodeId>>,
    pub num_nodes: usize,
    pub strategy: WalkStrategy,
    pub seed: u64,
    pub graph_hash: String,
}

impl WalkCorpus {
    pub fn len(&self) -> usize {
        self.walks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walks.is_empty()
    }

    pub fn num_tokens(&self) -> usize {
        self.walks.iter().map(Vec::len).sum()
    }

    /// Writes one walk per line as space-separated labels after a provenance
    /// header comment.
    pub fn write<W: Write>(&self, mut w: W, labels: &NodeLabels) -> Result<()> {
        writeln!(
            w,
            "# HETEDGE-CORPUS v1 strategy={} seed={} graph={} nodes={}",
            self.strategy, self.seed, self.graph_hash, self.num_nodes
        )?;
        for walk in &self.walks {
            let mut first = true;
            for v in walk {
                if !first {
                    w.write_all(b" ")?;
                }
                w.write_all(labels.label(*v).as_bytes())?;
                first = false;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R, labels: &NodeLabels) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::artifact("corpus", "empty file"))??;
        let rest = header
            .strip_prefix("# HETEDGE-CORPUS v1")
            .ok_or_else(|| Error::parse(1, "expected `# HETEDGE-CORPUS v1` header"))?;
        let mut strategy = None;
        let mut seed = None;
        let mut graph_hash = None;
        let mut num_nodes = None;
        for kv in rest.split_whitespace() {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::parse(1, format!("bad header field `{kv}`")))?;
            match k {
                "strategy" => strategy = Some(v.parse::<WalkStrategy>()?),
                "seed" => seed = Some(v.parse::<u64>().map_err(|e| Error::parse(1, e.to_string()))?),
                "graph" => graph_hash = Some(v.to_string()),
                "nodes" => num_nodes = Some(v.parse::<usize>().map_err(|e| Error::parse(1, e.to_string()))?),
                _ => {}
            }
        }
        let missing = || Error::parse(1, "corpus header is missing a field");
        let num_nodes = num_nodes.ok_or_else(missing)?;
        if num_nodes != labels.len() {
            return Err(Error::artifact("corpus", format!("built for {num_nodes} nodes, graph has {}", labels.len())));
        }
        let mut walks = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let walk = line
                .split(' ')
                .map(|l| labels.get(l).ok_or_else(|| Error::parse(i + 2, format!("unknown node `{l}`"))))
                .collect::<Result<Vec<_>>>()?;
            walks.push(walk);
        }
        Ok(WalkCorpus {
            walks,
            num_nodes,
            strategy: strategy.ok_or_else(missing)?,
            seed: seed.ok_or_else(missing)?,
            graph_hash: graph_hash.ok_or_else(missing)?,
        })
    }
}

fn walk_from(g: WalkGraph<'_>, flat: Option<&HomogeneousGraph>, cfg: &WalkConfig, start: NodeId, idx: usize) -> Vec<NodeId> {
    let mut rng = rng_from(cfg.seed, &[start.0 as u64, idx as u64]);
    let len = cfg.walk_length;
    match (g, cfg.strategy) {
        (WalkGraph::Homogeneous(h), WalkStrategy::Node2Vec) => node2vec_walk(h, start, len, cfg.p, cfg.q, &mut rng),
        (WalkGraph::Homogeneous(h), _) => uniform_walk(h, start, len, &mut rng),
        (WalkGraph::Multi(m), WalkStrategy::Hetero) => hetero_walk(m, start, len, &mut rng),
        (WalkGraph::Multi(m), WalkStrategy::UniformBias) => uniformbias_walk(m, start, len, &mut rng),
        (WalkGraph::Multi(_), WalkStrategy::Uniform) => uniform_walk(flat.unwrap(), start, len, &mut rng),
        (WalkGraph::Multi(_), WalkStrategy::Node2Vec) => {
            node2vec_walk(flat.unwrap(), start, len, cfg.p, cfg.q, &mut rng)
        }
    }
}

/// Generates `walks_per_node` walks from every node, ordered by walk index
/// and then by start node. `threads > 1` runs on a dedicated rayon pool and
/// yields the same corpus.
pub fn generate_corpus<'a>(g: impl Into<WalkGraph<'a>>, cfg: &WalkConfig, threads: usize) -> Result<WalkCorpus> {
    cfg.validate()?;
    let g = g.into();
    let flat = match (g, cfg.strategy) {
        (WalkGraph::Multi(m), WalkStrategy::Uniform | WalkStrategy::Node2Vec) => Some(m.flatten()),
        _ => None,
    };
    let n = g.num_nodes();
    let keys: Vec<(usize, NodeId)> =
        (0..cfg.walks_per_node).flat_map(|w| (0..n).map(move |v| (w, NodeId::from(v)))).collect();
    let walks = if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        pool.install(|| keys.par_iter().map(|&(w, v)| walk_from(g, flat.as_ref(), cfg, v, w)).collect())
    } else {
        keys.iter().map(|&(w, v)| walk_from(g, flat.as_ref(), cfg, v, w)).collect()
    };
    Ok(WalkCorpus { walks, num_nodes: n, strategy: cfg.strategy, seed: cfg.seed, graph_hash: g.fingerprint() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeSchema, MultiGraphBuilder};
    use crate::rng::Rng as ChaCha;
    use rand::SeedableRng;

    fn rng() -> ChaCha {
        ChaCha::seed_from_u64(11)
    }

    #[test]
    fn path_graph_walk_is_forced() {
        let g = HomogeneousGraph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(uniform_walk(&g, NodeId(0), 3, &mut rng()), vec![NodeId(0), NodeId(1), NodeId(0)]);
        assert_eq!(node2vec_walk(&g, NodeId(0), 3, 0.5, 2.0, &mut rng()), vec![NodeId(0), NodeId(1), NodeId(0)]);
    }

    #[test]
    fn isolated_start_yields_singleton() {
        let g = HomogeneousGraph::from_edges(3, &[(0, 1)]).unwrap();
        assert_eq!(uniform_walk(&g, NodeId(2), 10, &mut rng()), vec![NodeId(2)]);
        assert_eq!(node2vec_walk(&g, NodeId(2), 10, 1.0, 1.0, &mut rng()), vec![NodeId(2)]);
    }

    #[test]
    fn infinite_q_never_leaves_the_triangle() {
        // triangle 0,1,2 with pendant 3 on node 1
        let g = HomogeneousGraph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (1, 3)]).unwrap();
        let mut r = rng();
        for _ in 0..2000 {
            let next = node2vec_step(&g, NodeId(0), NodeId(1), 1.0, f64::INFINITY, &mut r).unwrap();
            assert!(next == NodeId(0) || next == NodeId(2), "stepped to {next}");
        }
    }

    #[test]
    fn multigraph_walks_terminate_at_isolated_nodes() {
        let mut b = MultiGraphBuilder::new(EdgeSchema::default());
        b.add_edge("a", "b", "chat").unwrap();
        b.add_node("c").unwrap();
        let g = b.build();
        let c = g.labels().get("c").unwrap();
        assert_eq!(hetero_walk(&g, c, 5, &mut rng()), vec![c]);
        assert_eq!(uniformbias_walk(&g, c, 5, &mut rng()), vec![c]);
    }

    #[test]
    fn walk_length_one_is_just_the_start() {
        let g = HomogeneousGraph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(uniform_walk(&g, NodeId(1), 1, &mut rng()), vec![NodeId(1)]);
        assert_eq!(node2vec_walk(&g, NodeId(1), 1, 2.0, 2.0, &mut rng()), vec![NodeId(1)]);
    }

    #[test]
    fn config_validation() {
        let mut cfg = WalkConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.walk_length = 0;
        assert!(cfg.validate().is_err());
        cfg.walk_length = 5;
        cfg.q = 0.0;
        assert!(cfg.validate().is_err());
        cfg.q = f64::NAN;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in [WalkStrategy::Uniform, WalkStrategy::Node2Vec, WalkStrategy::Hetero, WalkStrategy::UniformBias] {
            assert_eq!(s.as_str().parse::<WalkStrategy>().unwrap(), s);
        }
        assert!("metapath".parse::<WalkStrategy>().is_err());
    }
}
