//! Candidate retrieval, repeat suppression and re-ranking for friend
//! recommendation.
//!
//! A request for user `u` pulls the nearest neighbors of `u` from an exact
//! cosine index, drops existing friends and anything already shown to `u`
//! (tracked by a per-user bloom filter), scores the rest with the fusion
//! model and returns the top `k`.

mod bloom;
mod index;

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

pub use bloom::{analytic_fpr, BloomFilter};
pub use index::{nn_query, NnIndex};

use crate::edgeops::{Fallback, FeatureAssembler};
use crate::error::{Error, Result};
use crate::fusion::ModelArtifact;
use crate::graph::{EdgeType, MultiGraph, NodeId, NodeLabels};
use crate::sgns::EmbeddingTable;

const BLOOMS_MAGIC: &[u8] = b"HETEDGE-BLOOMS v1\n";

#[derive(Clone, Debug, PartialEq)]
pub struct ServingConfig {
    /// Neighbors fetched from the index before filtering.
    pub pool_size: usize,
    /// Name of the table the index is built from.
    pub index_table: String,
    /// Edge type whose neighbors are never recommended.
    pub friend_type: String,
    pub bits_per_item: usize,
    /// Expected recommendations per user, for bloom sizing.
    pub expected_items: usize,
    pub fallback: Fallback,
}

impl Default for ServingConfig {
    fn default() -> Self {
        ServingConfig {
            pool_size: 100,
            index_table: "friend".into(),
            friend_type: "friend".into(),
            bits_per_item: 10,
            expected_items: 100,
            fallback: Fallback::Zero,
        }
    }
}

pub type Recommendation = (NodeId, f64);

/// Serving state: immutable index, graph and model plus mutable per-user
/// bloom filters.
pub struct Recommender<'a> {
    graph: &'a MultiGraph,
    model: &'a ModelArtifact,
    assembler: FeatureAssembler<'a>,
    index: NnIndex,
    friend: EdgeType,
    cfg: ServingConfig,
    blooms: BTreeMap<NodeId, BloomFilter>,
}

impl<'a> Recommender<'a> {
    /// `tables` must be in the order the model was trained on.
    pub fn new(
        graph: &'a MultiGraph,
        tables: &'a [EmbeddingTable],
        model: &'a ModelArtifact,
        cfg: ServingConfig,
    ) -> Result<Self> {
        if cfg.pool_size == 0 {
            return Err(Error::InvalidConfig("candidate pool size must be at least 1".into()));
        }
        let assembler = FeatureAssembler::new(tables, model.spec.combiner, cfg.fallback)?;
        if assembler.type_names() != model.spec.type_names || assembler.segment_len() != model.spec.segment_len {
            return Err(Error::ShapeMismatch(format!(
                "tables {:?} do not match model types {:?}",
                assembler.type_names(),
                model.spec.type_names
            )));
        }
        if assembler.num_nodes() != graph.num_nodes() {
            return Err(Error::ShapeMismatch(format!(
                "tables have {} rows but the graph has {} nodes",
                assembler.num_nodes(),
                graph.num_nodes()
            )));
        }
        let table = tables
            .iter()
            .find(|t| t.name() == cfg.index_table)
            .ok_or_else(|| Error::InvalidConfig(format!("no embedding table named `{}`", cfg.index_table)))?;
        let friend = graph.schema().require(&cfg.friend_type)?;
        Ok(Recommender { graph, model, assembler, index: NnIndex::build(table), friend, cfg, blooms: BTreeMap::new() })
    }

    pub fn index(&self) -> &NnIndex {
        &self.index
    }

    pub fn config(&self) -> &ServingConfig {
        &self.cfg
    }

    pub fn bloom(&self, user: NodeId) -> Option<&BloomFilter> {
        self.blooms.get(&user)
    }

    pub fn blooms(&self) -> &BTreeMap<NodeId, BloomFilter> {
        &self.blooms
    }

    pub fn set_blooms(&mut self, blooms: BTreeMap<NodeId, BloomFilter>) {
        self.blooms = blooms;
    }

    /// Scores every filtered pool candidate, best first.
    pub fn candidates(&self, user: NodeId) -> Result<Vec<Recommendation>> {
        if !self.index.contains(user) {
            return Err(Error::NodeOutOfRange { id: user.index(), num_nodes: self.index.len() });
        }
        let seen = self.blooms.get(&user);
        let mut scored = Vec::new();
        for (c, _) in self.index.query(user, self.cfg.pool_size)? {
            if self.graph.has_edge(user, c, self.friend) || seen.is_some_and(|b| b.contains_node(c)) {
                continue;
            }
            let p = self.model.predict(&self.assembler.assemble(user, c)?)?;
            scored.push((c, p));
        }
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(scored)
    }

    /// Top `k` unseen candidates for `user`; they are marked as seen.
    pub fn recommend(&mut self, user: NodeId, k: usize) -> Result<Vec<Recommendation>> {
        let mut top = self.candidates(user)?;
        top.truncate(k);
        if !top.is_empty() {
            let (n, bits) = (self.cfg.expected_items, self.cfg.bits_per_item);
            let bloom = match self.blooms.entry(user) {
                std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::btree_map::Entry::Vacant(e) => e.insert(BloomFilter::with_capacity(n, bits)?),
            };
            for &(c, _) in &top {
                bloom.insert_node(c);
            }
        }
        Ok(top)
    }
}

/// Writes `user rank candidate probability` lines, ranks starting at 1.
pub fn write_recommendations<W: Write>(
    mut w: W,
    labels: &NodeLabels,
    batch: &[(NodeId, Vec<Recommendation>)],
) -> Result<()> {
    for (user, recs) in batch {
        for (rank, (c, p)) in recs.iter().enumerate() {
            writeln!(w, "{} {} {} {}", labels.label(*user), rank + 1, labels.label(*c), p)?;
        }
    }
    Ok(())
}

/// Parses the batch format back into per-user lists in file order.
pub fn read_recommendations<R: BufRead>(r: R, labels: &NodeLabels) -> Result<Vec<(NodeId, Vec<Recommendation>)>> {
    let mut out: Vec<(NodeId, Vec<Recommendation>)> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        if f.len() != 4 {
            return Err(Error::parse(i + 1, "expected `user rank candidate probability`"));
        }
        let user = labels.require(f[0]).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        let cand = labels.require(f[2]).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        let p: f64 = f[3].parse().map_err(|_| Error::parse(i + 1, format!("bad probability `{}`", f[3])))?;
        match out.last_mut() {
            Some((u, recs)) if *u == user => recs.push((cand, p)),
            _ => out.push((user, vec![(cand, p)])),
        }
    }
    Ok(out)
}

/// Writes every user's bloom filter: magic, count, then `(user, snapshot)`.
pub fn write_blooms<W: Write>(mut w: W, blooms: &BTreeMap<NodeId, BloomFilter>) -> Result<()> {
    w.write_all(BLOOMS_MAGIC)?;
    w.write_all(&(blooms.len() as u64).to_le_bytes())?;
    for (user, f) in blooms {
        w.write_all(&user.0.to_le_bytes())?;
        f.write(&mut w)?;
    }
    Ok(())
}

pub fn read_blooms<R: Read>(mut r: R) -> Result<BTreeMap<NodeId, BloomFilter>> {
    let mut magic = [0u8; BLOOMS_MAGIC.len()];
    r.read_exact(&mut magic)?;
    if magic != BLOOMS_MAGIC {
        return Err(Error::artifact("bloom store", "missing `HETEDGE-BLOOMS v1` header"));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let mut out = BTreeMap::new();
    for _ in 0..u64::from_le_bytes(b8) {
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        out.insert(NodeId(u32::from_le_bytes(b4)), BloomFilter::read(&mut r)?);
    }
    Ok(out)
}
