//! Skip-gram embeddings on two cliques joined by one bridge: nodes in the
//! same clique end up closer than nodes across it.
//!
//! cargo run --release --example train_embeddings

use hetedge::graph::{HomogeneousGraph, NodeId};
use hetedge::sgns::{cosine, train_on_graph, SgnsConfig};
use hetedge::walks::{generate_corpus, WalkConfig};

fn main() -> hetedge::Result<()> {
    let mut edges = Vec::new();
    for base in [0u32, 10] {
        for u in base..base + 10 {
            for v in u + 1..base + 10 {
                edges.push((u, v));
            }
        }
    }
    edges.push((9, 10));
    let g = HomogeneousGraph::from_edges(21, &edges)?; // node 20 stays isolated

    let corpus = generate_corpus(&g, &WalkConfig { walks_per_node: 20, walk_length: 20, seed: 1, ..Default::default() }, 1)?;
    let cfg = SgnsConfig { dim: 16, window: 4, epochs: 3, learning_rate: 0.025, seed: 1, ..Default::default() };
    let table = train_on_graph(&corpus, &cfg, &g)?;

    let mean = |pairs: &[(u32, u32)]| -> hetedge::Result<f64> {
        let mut s = 0.0;
        for &(a, b) in pairs {
            s += cosine(&table, NodeId(a), NodeId(b))?.value;
        }
        Ok(s / pairs.len() as f64)
    };
    let intra: Vec<(u32, u32)> = (0..8).map(|i| (i, i + 1)).chain((10..18).map(|i| (i, i + 1))).collect();
    let inter: Vec<(u32, u32)> = (0..9).map(|i| (i, i + 11)).collect();
    println!("{} x {} table", table.num_nodes(), table.dim());
    println!("mean cosine within a clique {:.3}, across {:.3}", mean(&intra)?, mean(&inter)?);
    println!("isolated node 20 active: {}", table.is_active(NodeId(20)));
    Ok(())
}
