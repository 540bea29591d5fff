use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::math::{dot, norm};
use crate::sgns::EmbeddingTable;

/// Exact cosine nearest-neighbor index over one embedding table.
///
/// Results are sorted by descending similarity with ties broken by ascending
/// node id. Rows with zero norm have similarity 0 to everything.
#[derive(Clone, Debug)]
pub struct NnIndex {
    dim: usize,
    rows: Vec<f64>,
    norms: Vec<f64>,
}

fn by_similarity(a: &(NodeId, f64), b: &(NodeId, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

impl NnIndex {
    pub fn build(table: &EmbeddingTable) -> Self {
        let n = table.num_nodes();
        let mut rows = Vec::with_capacity(n * table.dim());
        let mut norms = Vec::with_capacity(n);
        for i in 0..n {
            let r = table.row(NodeId::from(i));
            rows.extend_from_slice(r);
            norms.push(norm(r));
        }
        NnIndex { dim: table.dim(), rows, norms }
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    fn similarity(&self, q: usize, i: usize) -> f64 {
        let d = self.norms[q] * self.norms[i];
        if d == 0.0 {
            0.0
        } else {
            dot(self.row(q), self.row(i)) / d
        }
    }

    /// Exact top-`k` neighbors of `query` by cosine, excluding `query`.
    pub fn query(&self, query: NodeId, k: usize) -> Result<Vec<(NodeId, f64)>> {
        if !self.contains(query) {
            return Err(Error::NodeOutOfRange { id: query.index(), num_nodes: self.len() });
        }
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        let q = query.index();
        let mut scored: Vec<(NodeId, f64)> =
            (0..self.len()).filter(|&i| i != q).map(|i| (NodeId::from(i), self.similarity(q, i))).collect();
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, by_similarity);
            scored.truncate(k);
        }
        scored.sort_by(by_similarity);
        Ok(scored)
    }
}

/// Same as [`NnIndex::query`].
pub fn nn_query(index: &NnIndex, query_node: NodeId, k: usize) -> Result<Vec<(NodeId, f64)>> {
    index.query(query_node, k)
}
