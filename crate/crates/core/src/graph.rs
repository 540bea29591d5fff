//! Typed, undirected multi-graph stored as one compressed adjacency layer per
//! edge type.
//!
//! Parallel edges exist only across types: within a layer every neighbor
//! appears at most once and neighbor lists are sorted ascending. All layers
//! share one dense node-id space, so splitting out a single type keeps every
//! node (isolated ones included).

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Dense node index in `0..N`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Position of an edge type in the schema. The schema order is also the
/// feature order used downstream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeType(pub u16);

impl EdgeType {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered set of edge-type names.
///
/// A closed schema rejects unknown type names at ingestion; an open schema
/// appends them in order of first appearance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSchema {
    names: Vec<String>,
    closed: bool,
}

impl Default for EdgeSchema {
    fn default() -> Self {
        EdgeSchema::closed(["contact", "friend", "chat"]).expect("default schema is valid")
    }
}

impl EdgeSchema {
    pub fn closed<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidConfig("a closed edge schema needs at least one type".into()));
        }
        let mut schema = EdgeSchema { names: Vec::new(), closed: true };
        for name in names {
            schema.push(name)?;
        }
        Ok(schema)
    }

    /// Open schema, optionally seeded with an initial type order.
    pub fn open<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut schema = EdgeSchema { names: Vec::new(), closed: false };
        for name in names {
            schema.push(name.into())?;
        }
        Ok(schema)
    }

    fn push(&mut self, name: String) -> Result<EdgeType> {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidConfig(format!("invalid edge type name `{name}`")));
        }
        if self.names.contains(&name) {
            return Err(Error::InvalidConfig(format!("duplicate edge type `{name}`")));
        }
        if self.names.len() >= u16::MAX as usize {
            return Err(Error::InvalidConfig("too many edge types".into()));
        }
        self.names.push(name);
        Ok(EdgeType((self.names.len() - 1) as u16))
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<EdgeType> {
        self.names.iter().position(|n| n == name).map(|i| EdgeType(i as u16))
    }

    /// Like [`get`](Self::get) but reports an unknown name as an error.
    pub fn require(&self, name: &str) -> Result<EdgeType> {
        self.get(name).ok_or_else(|| Error::UnknownEdgeType(name.to_string()))
    }

    pub fn name(&self, t: EdgeType) -> &str {
        &self.names[t.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn types(&self) -> impl Iterator<Item = EdgeType> {
        (0..self.names.len()).map(|i| EdgeType(i as u16))
    }

    fn resolve_or_add(&mut self, name: &str) -> Result<EdgeType> {
        match self.get(name) {
            Some(t) => Ok(t),
            None if self.closed => Err(Error::UnknownEdgeType(name.to_string())),
            None => self.push(name.to_string()),
        }
    }
}

/// Bijection between external string labels and dense node ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeLabels {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl NodeLabels {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<NodeId> {
        self.get(label).ok_or_else(|| Error::UnknownNode(label.to_string()))
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.labels[id.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &str)> {
        self.labels.iter().enumerate().map(|(i, l)| (NodeId::from(i), l.as_str()))
    }

    fn intern(&mut self, label: &str) -> Result<NodeId> {
        if let Some(id) = self.index.get(label) {
            return Ok(*id);
        }
        validate_label(label)?;
        let id = NodeId::from(self.labels.len());
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        Ok(id)
    }
}

// Labels end up space-separated in corpus and embedding files.
fn validate_label(label: &str) -> Result<()> {
    if label.is_empty() || label.chars().any(char::is_whitespace) {
        return Err(Error::InvalidConfig(format!("node label `{label}` is empty or contains whitespace")));
    }
    Ok(())
}

/// Compressed sparse row adjacency for one edge type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Csr {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl Csr {
    /// Builds a symmetric layer from undirected pairs. Pairs may be given in
    /// either orientation and may repeat.
    fn from_pairs(num_nodes: usize, pairs: &[(u32, u32)]) -> Self {
        let mut directed: Vec<(u32, u32)> = Vec::with_capacity(pairs.len() * 2);
        for &(a, b) in pairs {
            directed.push((a, b));
            directed.push((b, a));
        }
        directed.sort_unstable();
        directed.dedup();
        let mut offsets = vec![0usize; num_nodes + 1];
        for &(a, _) in &directed {
            offsets[a as usize + 1] += 1;
        }
        for i in 0..num_nodes {
            offsets[i + 1] += offsets[i];
        }
        let targets = directed.into_iter().map(|(_, b)| NodeId(b)).collect();
        Csr { offsets, targets }
    }

    fn validate(&self, num_nodes: usize) -> std::result::Result<(), String> {
        if self.offsets.len() != num_nodes + 1 || self.offsets[0] != 0 {
            return Err("offset array has the wrong shape".into());
        }
        if *self.offsets.last().unwrap() != self.targets.len() {
            return Err("offsets do not cover the target array".into());
        }
        for u in 0..num_nodes {
            if self.offsets[u] > self.offsets[u + 1] {
                return Err("offsets are not monotone".into());
            }
            let row = self.row(u);
            for (i, &v) in row.iter().enumerate() {
                if v.index() >= num_nodes {
                    return Err(format!("target {v} out of range"));
                }
                if v.index() == u {
                    return Err(format!("self-loop at node {u}"));
                }
                if i > 0 && row[i - 1] >= v {
                    return Err(format!("neighbor list of node {u} is not strictly ascending"));
                }
                if self.row(v.index()).binary_search(&NodeId::from(u)).is_err() {
                    return Err(format!("edge {u}-{v} is not symmetric"));
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn row(&self, u: usize) -> &[NodeId] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }
}

/// Read access shared by the homogeneous walkers.
pub trait Adjacency {
    fn num_nodes(&self) -> usize;

    /// Sorted neighbor list of `u`.
    fn neighbors(&self, u: NodeId) -> &[NodeId];

    fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    fn degree_of(&self, u: NodeId) -> usize {
        self.neighbors(u).len()
    }
}

/// A single-type restriction of a [`MultiGraph`] over the same node-id space.
///
/// `edge_type` is `None` for the union of all types (see
/// [`MultiGraph::flatten`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousGraph {
    edge_type: Option<EdgeType>,
    name: String,
    csr: Csr,
}

impl HomogeneousGraph {
    pub fn edge_type(&self) -> Option<EdgeType> {
        self.edge_type
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_edges(&self) -> usize {
        self.csr.num_edges()
    }

    /// Content hash over the adjacency arrays.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.name.as_bytes());
        for o in &self.csr.offsets {
            h.update((*o as u64).to_le_bytes());
        }
        for t in &self.csr.targets {
            h.update(t.0.to_le_bytes());
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Build directly from undirected id pairs; mostly useful for fixtures.
    pub fn from_edges(num_nodes: usize, edges: &[(u32, u32)]) -> Result<Self> {
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidConfig(format!("self-loop at node {a}")));
            }
            let hi = a.max(b) as usize;
            if hi >= num_nodes {
                return Err(Error::NodeOutOfRange { id: hi, num_nodes });
            }
        }
        Ok(HomogeneousGraph {
            edge_type: None,
            name: "graph".into(),
            csr: Csr::from_pairs(num_nodes, edges),
        })
    }
}

impl Adjacency for HomogeneousGraph {
    fn num_nodes(&self) -> usize {
        self.csr.num_nodes()
    }

    #[inline]
    fn neighbors(&self, u: NodeId) -> &[NodeId] {
        self.csr.row(u.index())
    }
}

/// Undirected multi-graph with one adjacency layer per edge type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiGraph {
    schema: EdgeSchema,
    labels: NodeLabels,
    layers: Vec<Csr>,
}

impl MultiGraph {
    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn schema(&self) -> &EdgeSchema {
        &self.schema
    }

    pub fn labels(&self) -> &NodeLabels {
        &self.labels
    }

    pub fn num_types(&self) -> usize {
        self.layers.len()
    }

    /// Sorted type-`t` neighbors of `u`.
    #[inline]
    pub fn neighbors(&self, u: NodeId, t: EdgeType) -> &[NodeId] {
        self.layers[t.index()].row(u.index())
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId, t: EdgeType) -> bool {
        u.index() < self.num_nodes() && self.neighbors(u, t).binary_search(&v).is_ok()
    }

    /// Per-type degree, or the multi-edge degree summed over all types.
    pub fn degree(&self, v: NodeId, t: Option<EdgeType>) -> Result<usize> {
        self.check_node(v)?;
        Ok(match t {
            Some(t) => {
                self.check_type(t)?;
                self.neighbors(v, t).len()
            }
            None => self.total_degree(v),
        })
    }

    #[inline]
    pub(crate) fn total_degree(&self, v: NodeId) -> usize {
        self.layers.iter().map(|l| l.row(v.index()).len()).sum()
    }

    /// Number of undirected type-`t` edges.
    pub fn edge_count(&self, t: EdgeType) -> usize {
        self.layers[t.index()].num_edges()
    }

    /// Number of undirected multi-edges over all types.
    pub fn total_edge_count(&self) -> usize {
        self.layers.iter().map(Csr::num_edges).sum()
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if v.index() >= self.num_nodes() {
            return Err(Error::NodeOutOfRange { id: v.index(), num_nodes: self.num_nodes() });
        }
        Ok(())
    }

    fn check_type(&self, t: EdgeType) -> Result<()> {
        if t.index() >= self.layers.len() {
            return Err(Error::UnknownEdgeType(format!("#{}", t.0)));
        }
        Ok(())
    }

    /// Restriction to type `t` over the same node-id space.
    pub fn split_by_type(&self, t: EdgeType) -> Result<HomogeneousGraph> {
        self.check_type(t)?;
        Ok(HomogeneousGraph {
            edge_type: Some(t),
            name: self.schema.name(t).to_string(),
            csr: self.layers[t.index()].clone(),
        })
    }

    pub fn split_by_name(&self, name: &str) -> Result<HomogeneousGraph> {
        self.split_by_type(self.schema.require(name)?)
    }

    /// Union of all layers as a simple graph (type multiplicity dropped).
    pub fn flatten(&self) -> HomogeneousGraph {
        let pairs: Vec<(u32, u32)> = self
            .schema
            .types()
            .flat_map(|t| self.edges(t))
            .map(|(a, b)| (a.0, b.0))
            .collect();
        HomogeneousGraph { edge_type: None, name: "*".into(), csr: Csr::from_pairs(self.num_nodes(), &pairs) }
    }

    /// Type-`t` edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self, t: EdgeType) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        let layer = &self.layers[t.index()];
        (0..self.num_nodes()).flat_map(move |u| {
            layer
                .row(u)
                .iter()
                .filter(move |v| v.index() > u)
                .map(move |&v| (NodeId::from(u), v))
        })
    }

    /// Short content hash used to tie downstream artifacts to this graph.
    pub fn fingerprint(&self) -> String {
        let mut buf = Vec::new();
        self.write_snapshot(&mut buf).expect("writing to a Vec cannot fail");
        let digest = Sha256::digest(&buf);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Writes the `HETEDGE-GRAPH v1` text snapshot.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "HETEDGE-GRAPH v1")?;
        writeln!(w, "types {} {}", self.schema.len(), if self.schema.closed { "closed" } else { "open" })?;
        for name in self.schema.names() {
            writeln!(w, "{name}")?;
        }
        writeln!(w, "nodes {}", self.num_nodes())?;
        for (_, label) in self.labels.iter() {
            writeln!(w, "{label}")?;
        }
        for (t, layer) in self.layers.iter().enumerate() {
            writeln!(w, "layer {} {}", self.schema.names[t], layer.targets.len())?;
            write!(w, "offsets")?;
            for o in &layer.offsets {
                write!(w, " {o}")?;
            }
            writeln!(w)?;
            write!(w, "targets")?;
            for v in &layer.targets {
                write!(w, " {}", v.0)?;
            }
            writeln!(w)?;
        }
        writeln!(w, "end")?;
        Ok(())
    }

    /// Reads a snapshot written by [`write_snapshot`](Self::write_snapshot),
    /// re-checking every adjacency invariant.
    pub fn read_snapshot<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = move || -> Result<(usize, String)> {
            match lines.next() {
                Some((n, Ok(l))) => Ok((n, l)),
                Some((_, Err(e))) => Err(e.into()),
                None => Err(Error::artifact("graph snapshot", "unexpected end of file")),
            }
        };
        let (n, header) = next()?;
        if header.trim_end() != "HETEDGE-GRAPH v1" {
            return Err(Error::parse(n, format!("expected `HETEDGE-GRAPH v1` header, found `{header}`")));
        }
        let (n, line) = next()?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let (num_types, closed) = match fields.as_slice() {
            ["types", k, mode @ ("closed" | "open")] => {
                (k.parse::<usize>().map_err(|e| Error::parse(n, e.to_string()))?, *mode == "closed")
            }
            _ => return Err(Error::parse(n, "expected `types <count> closed|open`")),
        };
        let mut names = Vec::with_capacity(num_types);
        for _ in 0..num_types {
            names.push(next()?.1);
        }
        let schema = if closed { EdgeSchema::closed(names)? } else { EdgeSchema::open(names)? };

        let (n, line) = next()?;
        let num_nodes: usize = line
            .strip_prefix("nodes ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::parse(n, "expected `nodes <count>`"))?;
        let mut labels = NodeLabels::default();
        for _ in 0..num_nodes {
            let (n, label) = next()?;
            if labels.get(&label).is_some() {
                return Err(Error::parse(n, format!("duplicate node label `{label}`")));
            }
            labels.intern(&label).map_err(|e| Error::parse(n, e.to_string()))?;
        }

        let mut layers = Vec::with_capacity(num_types);
        for t in 0..num_types {
            let (n, line) = next()?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 || fields[0] != "layer" || fields[1] != schema.names[t] {
                return Err(Error::parse(n, format!("expected `layer {} <len>`", schema.names[t])));
            }
            let (n, line) = next()?;
            let offsets = parse_numbers(n, &line, "offsets")?;
            let (n, line) = next()?;
            let targets: Vec<NodeId> = parse_numbers(n, &line, "targets")?
                .into_iter()
                .map(|v| NodeId(v as u32))
                .collect();
            let csr = Csr { offsets, targets };
            csr.validate(num_nodes).map_err(|m| Error::parse(n, m))?;
            layers.push(csr);
        }
        let (n, line) = next()?;
        if line.trim() != "end" {
            return Err(Error::parse(n, "expected `end`"));
        }
        Ok(MultiGraph { schema, labels, layers })
    }
}

fn parse_numbers(line_no: usize, line: &str, key: &str) -> Result<Vec<usize>> {
    let mut it = line.split_whitespace();
    if it.next() != Some(key) {
        return Err(Error::parse(line_no, format!("expected `{key}` row")));
    }
    it.map(|s| s.parse::<usize>().map_err(|e| Error::parse(line_no, format!("{s}: {e}"))))
        .collect()
}

/// Incremental construction of a [`MultiGraph`].
#[derive(Clone, Debug)]
pub struct MultiGraphBuilder {
    schema: EdgeSchema,
    labels: NodeLabels,
    pairs: Vec<Vec<(u32, u32)>>,
}

impl MultiGraphBuilder {
    pub fn new(schema: EdgeSchema) -> Self {
        let pairs = vec![Vec::new(); schema.len()];
        MultiGraphBuilder { schema, labels: NodeLabels::default(), pairs }
    }

    pub fn schema(&self) -> &EdgeSchema {
        &self.schema
    }

    pub fn add_node(&mut self, label: &str) -> Result<NodeId> {
        self.labels.intern(label)
    }

    /// Adds an undirected typed edge between two labelled nodes, interning
    /// unseen labels. Self-loops are rejected.
    pub fn add_edge(&mut self, a: &str, b: &str, edge_type: &str) -> Result<()> {
        if a == b {
            return Err(Error::InvalidConfig(format!("self-loop on `{a}`")));
        }
        let t = self.schema.resolve_or_add(edge_type)?;
        if self.pairs.len() < self.schema.len() {
            self.pairs.resize(self.schema.len(), Vec::new());
        }
        let u = self.labels.intern(a)?;
        let v = self.labels.intern(b)?;
        self.pairs[t.index()].push((u.0, v.0));
        Ok(())
    }

    /// Adds an edge between already-interned nodes.
    pub fn add_edge_ids(&mut self, u: NodeId, v: NodeId, t: EdgeType) -> Result<()> {
        let n = self.labels.len();
        for id in [u, v] {
            if id.index() >= n {
                return Err(Error::NodeOutOfRange { id: id.index(), num_nodes: n });
            }
        }
        if u == v {
            return Err(Error::InvalidConfig(format!("self-loop on node {u}")));
        }
        if t.index() >= self.schema.len() {
            return Err(Error::UnknownEdgeType(format!("#{}", t.0)));
        }
        self.pairs[t.index()].push((u.0, v.0));
        Ok(())
    }

    pub fn build(self) -> MultiGraph {
        let n = self.labels.len();
        let layers = self.pairs.iter().map(|p| Csr::from_pairs(n, p)).collect();
        MultiGraph { schema: self.schema, labels: self.labels, layers }
    }
}

/// What happened while reading an edge list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub lines_read: usize,
    pub edges_accepted: usize,
    /// 1-based line numbers of rejected self-loops.
    pub self_loops: Vec<usize>,
}

/// Reads a tab-separated `src<TAB>dst<TAB>type` edge list. Lines starting with
/// `#` and blank lines are skipped; self-loops are reported and skipped.
pub fn load_edge_list<R: BufRead>(reader: R, schema: EdgeSchema) -> Result<(MultiGraph, IngestReport)> {
    let mut builder = MultiGraphBuilder::new(schema);
    let report = builder.ingest(reader)?;
    Ok((builder.build(), report))
}

impl MultiGraphBuilder {
    /// Adds every edge of a `src<TAB>dst<TAB>type` edge list; see
    /// [`load_edge_list`].
    pub fn ingest<R: BufRead>(&mut self, reader: R) -> Result<IngestReport> {
        let mut report = IngestReport::default();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            let line = line.trim_end_matches(['\r', '\n']);
            report.lines_read += 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [src, dst, ty] = fields.as_slice() else {
                return Err(Error::parse(line_no, format!("expected 3 tab-separated fields, found {}", fields.len())));
            };
            let (src, dst, ty) = (src.trim(), dst.trim(), ty.trim());
            if src == dst {
                log::warn!("line {line_no}: rejected self-loop on `{src}`");
                report.self_loops.push(line_no);
                continue;
            }
            match self.add_edge(src, dst, ty) {
                Ok(()) => report.edges_accepted += 1,
                Err(e @ Error::UnknownEdgeType(_)) => return Err(e),
                Err(e) => return Err(Error::parse(line_no, e.to_string())),
            }
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> MultiGraph {
        load_edge_list(text.as_bytes(), EdgeSchema::default()).unwrap().0
    }

    fn id(g: &MultiGraph, l: &str) -> NodeId {
        g.labels().get(l).unwrap()
    }

    #[test]
    fn ingest_symmetrizes_and_counts_types() {
        let g = load("A\tB\tfriend\nB\tC\tchat\nA\tB\tchat\n");
        let s = g.schema();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.degree(id(&g, "A"), s.get("friend")).unwrap(), 1);
        assert_eq!(g.degree(id(&g, "B"), s.get("chat")).unwrap(), 2);
        assert_eq!(g.degree(id(&g, "A"), None).unwrap(), 2);
        assert_eq!(g.degree(id(&g, "C"), s.get("friend")).unwrap(), 0);
    }

    #[test]
    fn duplicate_edges_collapse_within_a_type() {
        let g = load("A\tB\tfriend\nA\tB\tfriend\nB\tA\tfriend\n");
        let friend = g.schema().get("friend").unwrap();
        assert_eq!(g.edge_count(friend), 1);
        assert_eq!(g.neighbors(id(&g, "A"), friend), &[id(&g, "B")]);
    }

    #[test]
    fn empty_input_gives_empty_graph() {
        let g = load("");
        assert_eq!(g.num_nodes(), 0);
        assert_eq!(g.total_edge_count(), 0);
        assert_eq!(g.num_types(), 3);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let g = load("# header\n\nA\tB\tcontact\n");
        assert_eq!(g.total_edge_count(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = load_edge_list("A\tB\tfriend\nA B friend\n".as_bytes(), EdgeSchema::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn self_loop_is_reported_and_skipped() {
        let (g, report) =
            load_edge_list("A\tA\tfriend\nA\tB\tfriend\n".as_bytes(), EdgeSchema::default()).unwrap();
        assert_eq!(report.self_loops, vec![1]);
        assert_eq!(report.edges_accepted, 1);
        assert_eq!(g.total_edge_count(), 1);
    }

    #[test]
    fn unknown_type_in_closed_schema_is_an_error() {
        let err = load_edge_list("A\tB\tlikes\n".as_bytes(), EdgeSchema::default()).unwrap_err();
        assert!(matches!(err, Error::UnknownEdgeType(ref t) if t == "likes"));
    }

    #[test]
    fn open_schema_appends_types_in_order_of_appearance() {
        let (g, _) = load_edge_list("A\tB\tlikes\nB\tC\tfollows\n".as_bytes(), EdgeSchema::open(["x"]).unwrap())
            .unwrap();
        assert_eq!(g.schema().names(), &["x", "likes", "follows"]);
    }

    #[test]
    fn split_keeps_node_space() {
        let g = load("A\tB\tfriend\nB\tC\tchat\nA\tB\tchat\n");
        let friend = g.split_by_name("friend").unwrap();
        assert_eq!(friend.num_nodes(), 3);
        assert_eq!(friend.num_edges(), 1);
        assert_eq!(friend.neighbors(id(&g, "C")), &[] as &[NodeId]);
        assert!(friend.has_edge(id(&g, "A"), id(&g, "B")));

        let contact = g.split_by_name("contact").unwrap();
        assert_eq!(contact.num_nodes(), 3);
        assert_eq!(contact.num_edges(), 0);
        assert!(g.split_by_name("likes").is_err());
    }

    #[test]
    fn pair_carrying_every_type_appears_in_every_split() {
        let g = load("A\tB\tfriend\nA\tB\tchat\nA\tB\tcontact\n");
        for t in g.schema().types() {
            assert!(g.split_by_type(t).unwrap().has_edge(id(&g, "A"), id(&g, "B")));
        }
        assert_eq!(g.degree(id(&g, "A"), None).unwrap(), 3);
        assert_eq!(g.flatten().num_edges(), 1);
    }

    #[test]
    fn degree_rejects_out_of_range_nodes() {
        let g = load("A\tB\tfriend\n");
        assert!(matches!(g.degree(NodeId(9), None), Err(Error::NodeOutOfRange { id: 9, .. })));
    }

    #[test]
    fn labels_with_spaces_are_rejected() {
        let err = load_edge_list("A x\tB\tfriend\n".as_bytes(), EdgeSchema::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn snapshot_round_trips() {
        let g = load("A\tB\tfriend\nB\tC\tchat\nA\tB\tchat\nD\tA\tcontact\n");
        let mut buf = Vec::new();
        g.write_snapshot(&mut buf).unwrap();
        let back = MultiGraph::read_snapshot(&buf[..]).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.fingerprint(), g.fingerprint());
    }

    #[test]
    fn snapshot_with_asymmetric_layer_is_rejected() {
        let text = "HETEDGE-GRAPH v1\ntypes 1 closed\nfriend\nnodes 2\nA\nB\nlayer friend 1\noffsets 0 1 1\ntargets 1\nend\n";
        assert!(MultiGraph::read_snapshot(text.as_bytes()).is_err());
    }
}
