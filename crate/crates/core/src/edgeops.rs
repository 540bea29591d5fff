//! Edge vectors from node vectors, and the per-type feature bundle for a
//! node pair.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fusion::LabeledPairSet;
use crate::graph::{NodeId, NodeLabels};
use crate::sgns::EmbeddingTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Combiner {
    Average,
    Hadamard,
    Concatenate,
}

impl Combiner {
    pub fn as_str(self) -> &'static str {
        match self {
            Combiner::Average => "average",
            Combiner::Hadamard => "hadamard",
            Combiner::Concatenate => "concatenate",
        }
    }

    /// Edge-vector length for node vectors of length `dim`.
    pub fn output_len(self, dim: usize) -> usize {
        match self {
            Combiner::Concatenate => 2 * dim,
            _ => dim,
        }
    }

    fn code(self) -> u8 {
        match self {
            Combiner::Average => 0,
            Combiner::Hadamard => 1,
            Combiner::Concatenate => 2,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        [Combiner::Average, Combiner::Hadamard, Combiner::Concatenate].into_iter().find(|m| m.code() == c)
    }
}

impl fmt::Display for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Combiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(Combiner::Average),
            "hadamard" => Ok(Combiner::Hadamard),
            "concatenate" | "concat" => Ok(Combiner::Concatenate),
            other => Err(Error::InvalidConfig(format!("unknown combiner `{other}`"))),
        }
    }
}

/// What a node contributes in a subnetwork where it has no edges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fallback {
    #[default]
    Zero,
    /// Keep whatever row the table holds (the random initialization).
    Initialized,
}

impl Fallback {
    pub fn as_str(self) -> &'static str {
        match self {
            Fallback::Zero => "zero",
            Fallback::Initialized => "initialized",
        }
    }
}

impl FromStr for Fallback {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Fallback::Zero),
            "initialized" | "init" => Ok(Fallback::Initialized),
            other => Err(Error::InvalidConfig(format!("unknown fallback `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeVector {
    pub source: String,
    pub combiner: Combiner,
    pub values: Vec<f64>,
}

/// Combines two node vectors. For `Concatenate` the caller decides the
/// order; [`assemble`] always passes the smaller node id first.
pub fn combine(u: &[f64], v: &[f64], mode: Combiner) -> Result<EdgeVector> {
    let mut values = Vec::with_capacity(mode.output_len(u.len()));
    combine_into(u, v, mode, &mut values)?;
    Ok(EdgeVector { source: String::new(), combiner: mode, values })
}

fn combine_into(u: &[f64], v: &[f64], mode: Combiner, out: &mut Vec<f64>) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::ShapeMismatch(format!("node vectors of length {} and {}", u.len(), v.len())));
    }
    match mode {
        Combiner::Average => out.extend(u.iter().zip(v).map(|(a, b)| (a + b) / 2.0)),
        Combiner::Hadamard => out.extend(u.iter().zip(v).map(|(a, b)| a * b)),
        Combiner::Concatenate => {
            out.extend_from_slice(u);
            out.extend_from_slice(v);
        }
    }
    Ok(())
}

/// One edge vector per table, in table order, for a canonically ordered pair.
#[derive(Clone, Debug, PartialEq)]
pub struct HeteroEdgeFeatures {
    pub pair: (NodeId, NodeId),
    pub combiner: Combiner,
    pub vectors: Vec<EdgeVector>,
}

impl HeteroEdgeFeatures {
    pub fn segment_lens(&self) -> Vec<usize> {
        self.vectors.iter().map(|v| v.values.len()).collect()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.vectors.iter().flat_map(|v| v.values.iter().copied()).collect()
    }
}

/// Validated view over one table per edge type.
#[derive(Clone, Copy, Debug)]
pub struct FeatureAssembler<'a> {
    tables: &'a [EmbeddingTable],
    combiner: Combiner,
    fallback: Fallback,
}

impl<'a> FeatureAssembler<'a> {
    pub fn new(tables: &'a [EmbeddingTable], combiner: Combiner, fallback: Fallback) -> Result<Self> {
        let first = tables.first().ok_or_else(|| Error::ShapeMismatch("no embedding tables".into()))?;
        for t in tables {
            if t.dim() != first.dim() {
                return Err(Error::ShapeMismatch(format!(
                    "table `{}` has dim {} but `{}` has dim {}",
                    t.name(),
                    t.dim(),
                    first.name(),
                    first.dim()
                )));
            }
            if t.num_nodes() != first.num_nodes() {
                return Err(Error::ShapeMismatch(format!(
                    "table `{}` has {} rows but `{}` has {}",
                    t.name(),
                    t.num_nodes(),
                    first.name(),
                    first.num_nodes()
                )));
            }
        }
        Ok(FeatureAssembler { tables, combiner, fallback })
    }

    pub fn combiner(&self) -> Combiner {
        self.combiner
    }

    pub fn num_types(&self) -> usize {
        self.tables.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.tables[0].num_nodes()
    }

    pub fn segment_len(&self) -> usize {
        self.combiner.output_len(self.tables[0].dim())
    }

    pub fn width(&self) -> usize {
        self.segment_len() * self.tables.len()
    }

    pub fn type_names(&self) -> Vec<String> {
        self.tables.iter().map(|t| t.name().to_string()).collect()
    }

    fn check(&self, v: NodeId) -> Result<()> {
        if v.index() >= self.num_nodes() {
            return Err(Error::NodeOutOfRange { id: v.index(), num_nodes: self.num_nodes() });
        }
        Ok(())
    }

    fn node_row<'t>(&self, table: &'t EmbeddingTable, v: NodeId, zeros: &'t [f64]) -> &'t [f64] {
        if self.fallback == Fallback::Zero && !table.is_active(v) {
            zeros
        } else {
            table.row(v)
        }
    }

    /// Appends the flattened features of `(u, v)` to `out`.
    pub fn write_flat(&self, u: NodeId, v: NodeId, out: &mut Vec<f64>) -> Result<()> {
        self.check(u)?;
        self.check(v)?;
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        let zeros = vec![0.0; self.tables[0].dim()];
        for t in self.tables {
            combine_into(self.node_row(t, a, &zeros), self.node_row(t, b, &zeros), self.combiner, out)?;
        }
        Ok(())
    }

    pub fn assemble(&self, u: NodeId, v: NodeId) -> Result<HeteroEdgeFeatures> {
        self.check(u)?;
        self.check(v)?;
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        let zeros = vec![0.0; self.tables[0].dim()];
        let vectors = self
            .tables
            .iter()
            .map(|t| {
                let mut e = combine(self.node_row(t, a, &zeros), self.node_row(t, b, &zeros), self.combiner)?;
                e.source = t.name().to_string();
                Ok(e)
            })
            .collect::<Result<_>>()?;
        Ok(HeteroEdgeFeatures { pair: (a, b), combiner: self.combiner, vectors })
    }
}

/// Feature bundle for one pair, one vector per table in table order.
pub fn assemble(
    tables: &[EmbeddingTable],
    pair: (NodeId, NodeId),
    mode: Combiner,
    fallback: Fallback,
) -> Result<HeteroEdgeFeatures> {
    FeatureAssembler::new(tables, mode, fallback)?.assemble(pair.0, pair.1)
}

/// Same as [`assemble`] with pair members given by label.
pub fn assemble_by_label(
    tables: &[EmbeddingTable],
    labels: &NodeLabels,
    pair: (&str, &str),
    mode: Combiner,
    fallback: Fallback,
) -> Result<HeteroEdgeFeatures> {
    assemble(tables, (labels.require(pair.0)?, labels.require(pair.1)?), mode, fallback)
}

/// Dense feature matrix for a labeled pair set, one row per pair.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    pub type_names: Vec<String>,
    pub combiner: Combiner,
    pub segment_len: usize,
    pub graph_hash: String,
    pub pairs: Vec<(NodeId, NodeId)>,
    pub labels: Vec<bool>,
    rows: Vec<f64>,
}

const FEAT_MAGIC: &[u8] = b"HETEDGE-FEAT v1\n";

impl FeatureSet {
    pub fn build(assembler: &FeatureAssembler<'_>, pairs: &LabeledPairSet, graph_hash: &str) -> Result<Self> {
        let mut rows = Vec::with_capacity(pairs.len() * assembler.width());
        let mut ps = Vec::with_capacity(pairs.len());
        let mut labels = Vec::with_capacity(pairs.len());
        for p in pairs.iter() {
            assembler.write_flat(p.u, p.v, &mut rows)?;
            ps.push(if p.u <= p.v { (p.u, p.v) } else { (p.v, p.u) });
            labels.push(p.label);
        }
        Ok(FeatureSet {
            type_names: assembler.type_names(),
            combiner: assembler.combiner(),
            segment_len: assembler.segment_len(),
            graph_hash: graph_hash.to_string(),
            pairs: ps,
            labels,
            rows,
        })
    }

    /// Assembles a set from raw rows; `rows.len()` must equal
    /// `labels.len() * type_names.len() * segment_len`.
    pub fn from_rows(
        type_names: Vec<String>,
        combiner: Combiner,
        segment_len: usize,
        pairs: Vec<(NodeId, NodeId)>,
        labels: Vec<bool>,
        rows: Vec<f64>,
    ) -> Result<Self> {
        let width = type_names.len() * segment_len;
        if pairs.len() != labels.len() || rows.len() != labels.len() * width {
            return Err(Error::ShapeMismatch("feature rows, pairs and labels disagree".into()));
        }
        Ok(FeatureSet { type_names, combiner, segment_len, graph_hash: String::new(), pairs, labels, rows })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_types(&self) -> usize {
        self.type_names.len()
    }

    pub fn width(&self) -> usize {
        self.segment_len * self.type_names.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.rows[i * w..(i + 1) * w]
    }

    pub fn segment(&self, i: usize, t: usize) -> &[f64] {
        let row = self.row(i);
        &row[t * self.segment_len..(t + 1) * self.segment_len]
    }

    pub fn targets(&self) -> Vec<f64> {
        self.labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect()
    }

    pub fn subset(&self, idx: &[usize]) -> FeatureSet {
        let mut rows = Vec::with_capacity(idx.len() * self.width());
        for &i in idx {
            rows.extend_from_slice(self.row(i));
        }
        FeatureSet {
            type_names: self.type_names.clone(),
            combiner: self.combiner,
            segment_len: self.segment_len,
            graph_hash: self.graph_hash.clone(),
            pairs: idx.iter().map(|&i| self.pairs[i]).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            rows,
        }
    }

    /// Writes the `HETEDGE-FEAT v1` binary container (little endian).
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(FEAT_MAGIC)?;
        w.write_all(&(self.type_names.len() as u32).to_le_bytes())?;
        for name in &self.type_names {
            write_str(&mut w, name)?;
        }
        w.write_all(&[self.combiner.code()])?;
        w.write_all(&(self.segment_len as u32).to_le_bytes())?;
        write_str(&mut w, &self.graph_hash)?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        for i in 0..self.len() {
            let (u, v) = self.pairs[i];
            w.write_all(&u.0.to_le_bytes())?;
            w.write_all(&v.0.to_le_bytes())?;
            w.write_all(&[self.labels[i] as u8])?;
            for x in self.row(i) {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; FEAT_MAGIC.len()];
        r.read_exact(&mut magic)?;
        if magic != FEAT_MAGIC {
            return Err(Error::artifact("feature dump", "missing `HETEDGE-FEAT v1` header"));
        }
        let num_types = read_u32(&mut r)? as usize;
        let type_names = (0..num_types).map(|_| read_str(&mut r)).collect::<Result<Vec<_>>>()?;
        let mut code = [0u8; 1];
        r.read_exact(&mut code)?;
        let combiner =
            Combiner::from_code(code[0]).ok_or_else(|| Error::artifact("feature dump", "unknown combiner code"))?;
        let segment_len = read_u32(&mut r)? as usize;
        let graph_hash = read_str(&mut r)?;
        let mut count = [0u8; 8];
        r.read_exact(&mut count)?;
        let count = u64::from_le_bytes(count) as usize;
        let width = num_types * segment_len;
        let mut pairs = Vec::with_capacity(count);
        let mut labels = Vec::with_capacity(count);
        let mut rows = Vec::with_capacity(count * width);
        let mut buf = [0u8; 8];
        for _ in 0..count {
            let u = read_u32(&mut r)?;
            let v = read_u32(&mut r)?;
            r.read_exact(&mut code)?;
            pairs.push((NodeId(u), NodeId(v)));
            labels.push(code[0] != 0);
            for _ in 0..width {
                r.read_exact(&mut buf)?;
                rows.push(f64::from_le_bytes(buf));
            }
        }
        Ok(FeatureSet { type_names, combiner, segment_len, graph_hash, pairs, labels, rows })
    }
}

fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let len = read_u32(r)? as usize;
    let mut b = vec![0u8; len];
    r.read_exact(&mut b)?;
    String::from_utf8(b).map_err(|e| Error::artifact("feature dump", e.to_string()))
}
