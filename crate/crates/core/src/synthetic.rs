//! Planted benchmark: a two-community multi-graph with `contact`, `friend`
//! and `chat` edges plus a set of future friendships.
//!
//! Every community is cut into small groups. Pre-period friendships follow
//! the communities only, chat edges are dense inside groups, and contact
//! edges are mostly noise. A share `chat_signal` of the future friendships
//! close pairs inside a group, so that part of the signal is visible only
//! through chat.

use std::collections::HashSet;
use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{EdgeSchema, MultiGraph, MultiGraphBuilder, NodeId};
use crate::rng::rng_from;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub num_nodes: usize,
    pub communities: usize,
    pub group_size: usize,
    /// Mean pre-period friend degree.
    pub friend_degree: f64,
    /// Mean chat degree.
    pub chat_degree: f64,
    /// Mean contact degree.
    pub contact_degree: f64,
    /// Share of friend and contact edges that cross communities.
    pub mixing: f64,
    /// Number of future friendships.
    pub post_edges: usize,
    /// Share of future friendships placed inside a chat group.
    pub chat_signal: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            num_nodes: 2000,
            communities: 2,
            group_size: 250,
            friend_degree: 4.0,
            chat_degree: 5.0,
            contact_degree: 3.0,
            mixing: 0.1,
            post_edges: 2000,
            chat_signal: 0.6,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.communities == 0 || self.group_size < 2 {
            return Err(Error::InvalidConfig("need at least one community and groups of two or more".into()));
        }
        if self.num_nodes < self.communities * self.group_size {
            return Err(Error::InvalidConfig("too few nodes for one group per community".into()));
        }
        for (name, x) in [("mixing", self.mixing), ("chat_signal", self.chat_signal)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidConfig(format!("{name} must be in [0, 1]")));
            }
        }
        for (name, x) in
            [("friend_degree", self.friend_degree), ("chat_degree", self.chat_degree), ("contact_degree", self.contact_degree)]
        {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and non-negative")));
            }
        }
        let half = self.num_nodes * (self.num_nodes - 1) / 4;
        if self.post_edges > half {
            return Err(Error::InvalidConfig("post_edges is too large for the node count".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticBenchmark {
    /// Pre-period multi-graph.
    pub graph: MultiGraph,
    /// Friendships formed after the snapshot; none is a pre-period friend edge.
    pub post_edges: Vec<(NodeId, NodeId)>,
    pub community: Vec<usize>,
    pub group: Vec<usize>,
}

const FRIEND_STREAM: u64 = 0x5F1;
const CHAT_STREAM: u64 = 0x5C4;
const CONTACT_STREAM: u64 = 0x5C0;
const POST_STREAM: u64 = 0x5B0;

struct Layout {
    community: Vec<usize>,
    group: Vec<usize>,
    members: Vec<Vec<usize>>,
    groups: Vec<Vec<usize>>,
}

impl Layout {
    fn new(cfg: &SyntheticConfig) -> Self {
        let n = cfg.num_nodes;
        let community: Vec<usize> = (0..n).map(|i| i * cfg.communities / n).collect();
        let mut members = vec![Vec::new(); cfg.communities];
        for (i, &c) in community.iter().enumerate() {
            members[c].push(i);
        }
        let mut group = vec![0; n];
        let mut groups = Vec::new();
        for m in &members {
            let count = (m.len() / cfg.group_size).max(1);
            let base = groups.len();
            groups.extend((0..count).map(|_| Vec::new()));
            for (j, &i) in m.iter().enumerate() {
                let g = base + j * count / m.len();
                group[i] = g;
                groups[g].push(i);
            }
        }
        Layout { community, group, members, groups }
    }
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Draws `count` distinct pairs, each from `draw`, skipping self-pairs,
/// repeats and pairs rejected by `allowed`.
fn draw_pairs<R: Rng>(
    count: usize,
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> (usize, usize),
    allowed: impl Fn((usize, usize)) -> bool,
) -> Vec<(usize, usize)> {
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count && attempts < count * 200 + 1000 {
        attempts += 1;
        let (a, b) = draw(rng);
        if a == b {
            continue;
        }
        let k = key(a, b);
        if allowed(k) && seen.insert(k) {
            out.push(k);
        }
    }
    out
}

pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticBenchmark> {
    cfg.validate()?;
    let n = cfg.num_nodes;
    let layout = Layout::new(cfg);
    let pick = |v: &Vec<usize>, rng: &mut crate::rng::Rng| v[rng.gen_range(0..v.len())];

    // Community-structured edges: intra with probability 1 - mixing.
    let structured = |degree: f64, stream: u64| {
        let mut rng = rng_from(cfg.seed, &[stream]);
        let m = (degree * n as f64 / 2.0).round() as usize;
        draw_pairs(
            m,
            &mut rng,
            |rng| {
                let a = rng.gen_range(0..n);
                let b = if rng.gen_bool(cfg.mixing) {
                    rng.gen_range(0..n)
                } else {
                    pick(&layout.members[layout.community[a]], rng)
                };
                (a, b)
            },
            |_| true,
        )
    };
    let friends = structured(cfg.friend_degree, FRIEND_STREAM);
    let contacts = structured(cfg.contact_degree, CONTACT_STREAM);

    let mut rng = rng_from(cfg.seed, &[CHAT_STREAM]);
    let chats = draw_pairs(
        (cfg.chat_degree * n as f64 / 2.0).round() as usize,
        &mut rng,
        |rng| {
            let a = rng.gen_range(0..n);
            (a, pick(&layout.groups[layout.group[a]], rng))
        },
        |_| true,
    );

    let friend_set: HashSet<(usize, usize)> = friends.iter().copied().collect();
    let mut rng = rng_from(cfg.seed, &[POST_STREAM]);
    let in_group = (cfg.post_edges as f64 * cfg.chat_signal).round() as usize;
    let mut post = draw_pairs(
        in_group,
        &mut rng,
        |rng| {
            let a = rng.gen_range(0..n);
            (a, pick(&layout.groups[layout.group[a]], rng))
        },
        |k| !friend_set.contains(&k),
    );
    let taken: HashSet<(usize, usize)> = post.iter().copied().collect();
    post.extend(draw_pairs(
        cfg.post_edges - post.len(),
        &mut rng,
        |rng| {
            let a = rng.gen_range(0..n);
            (a, pick(&layout.members[layout.community[a]], rng))
        },
        |k| !friend_set.contains(&k) && !taken.contains(&k) && layout.group[k.0] != layout.group[k.1],
    ));
    if post.len() < cfg.post_edges {
        return Err(Error::InvalidConfig(format!(
            "could only place {} of {} future friendships",
            post.len(),
            cfg.post_edges
        )));
    }

    let schema = EdgeSchema::default();
    let mut b = MultiGraphBuilder::new(schema.clone());
    let width = (n.max(2) - 1).to_string().len();
    for i in 0..n {
        b.add_node(&format!("u{i:0width$}"))?;
    }
    for (name, edges) in [("contact", &contacts), ("friend", &friends), ("chat", &chats)] {
        let t = schema.require(name)?;
        for &(u, v) in edges {
            b.add_edge_ids(NodeId::from(u), NodeId::from(v), t)?;
        }
    }
    Ok(SyntheticBenchmark {
        graph: b.build(),
        post_edges: post.into_iter().map(|(u, v)| (NodeId::from(u), NodeId::from(v))).collect(),
        community: layout.community,
        group: layout.group,
    })
}

impl SyntheticBenchmark {
    /// Writes the pre-period graph as a `src<TAB>dst<TAB>type` edge list.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        let labels = self.graph.labels();
        for t in self.graph.schema().types() {
            let name = self.graph.schema().name(t);
            for (u, v) in self.graph.edges(t) {
                writeln!(w, "{}\t{}\t{}", labels.label(u), labels.label(v), name)?;
            }
        }
        Ok(())
    }

    /// Writes the future friendships as `src<TAB>dst` lines.
    pub fn write_post_edges<W: Write>(&self, mut w: W) -> Result<()> {
        let labels = self.graph.labels();
        for &(u, v) in &self.post_edges {
            writeln!(w, "{}\t{}", labels.label(u), labels.label(v))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SyntheticConfig {
        SyntheticConfig { num_nodes: 200, group_size: 20, post_edges: 150, ..Default::default() }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.graph.fingerprint(), b.graph.fingerprint());
        assert_eq!(a.post_edges, b.post_edges);
        let c = generate(&SyntheticConfig { seed: 1, ..small() }).unwrap();
        assert_ne!(a.graph.fingerprint(), c.graph.fingerprint());
    }

    #[test]
    fn post_edges_are_new_and_distinct() {
        let bench = generate(&small()).unwrap();
        let friend = bench.graph.schema().require("friend").unwrap();
        let mut seen = HashSet::new();
        for &(u, v) in &bench.post_edges {
            assert!(u < v);
            assert!(!bench.graph.has_edge(u, v, friend));
            assert!(seen.insert((u, v)));
        }
        assert_eq!(bench.post_edges.len(), 150);
    }

    #[test]
    fn planted_structure_is_visible() {
        let bench = generate(&small()).unwrap();
        let s = bench.graph.schema();
        let chat = s.require("chat").unwrap();
        let friend = s.require("friend").unwrap();
        assert!(bench.graph.edges(chat).all(|(u, v)| bench.group[u.index()] == bench.group[v.index()]));
        let intra = bench.graph.edges(friend).filter(|(u, v)| bench.community[u.index()] == bench.community[v.index()]).count();
        assert!(intra as f64 > 0.85 * bench.graph.edge_count(friend) as f64);
        let grouped = bench.post_edges.iter().filter(|(u, v)| bench.group[u.index()] == bench.group[v.index()]).count();
        assert_eq!(grouped, 90);
    }

    #[test]
    fn edge_list_reloads_to_same_graph() {
        let bench = generate(&small()).unwrap();
        let mut buf = Vec::new();
        bench.write_edge_list(&mut buf).unwrap();
        let (g, _) = crate::graph::load_edge_list(&buf[..], EdgeSchema::default()).unwrap();
        for t in g.schema().types() {
            assert_eq!(g.edge_count(t), bench.graph.edge_count(t));
        }
    }
}
