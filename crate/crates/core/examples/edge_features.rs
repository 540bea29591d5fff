//! Edge vectors from node vectors: the three combiners, and how a pair with
//! no signal in one subnetwork is filled in.
//!
//! cargo run --example edge_features

use hetedge::edgeops::{combine, Combiner, Fallback, FeatureAssembler};
use hetedge::graph::{HomogeneousGraph, NodeId};
use hetedge::sgns::EmbeddingTable;

fn main() -> hetedge::Result<()> {
    let u = [1.0, 2.0, -1.0];
    let v = [0.5, -1.0, 3.0];
    for c in [Combiner::Average, Combiner::Hadamard, Combiner::Concatenate] {
        println!("{:<12} {:?}", c.as_str(), combine(&u, &v, c)?.values);
    }

    // two subnetworks over three nodes; node 2 has no chat edges
    let rows = |s: f64| (0..3).map(|i| vec![s * (i + 1) as f64, 1.0]).collect::<Vec<_>>();
    let mut friend = EmbeddingTable::from_rows("friend", rows(1.0))?;
    friend.mark_active_from(&HomogeneousGraph::from_edges(3, &[(0, 1), (1, 2)])?)?;
    let mut chat = EmbeddingTable::from_rows("chat", rows(0.1))?;
    chat.mark_active_from(&HomogeneousGraph::from_edges(3, &[(0, 1)])?)?;
    let tables = [friend, chat];

    for fallback in [Fallback::Zero, Fallback::Initialized] {
        let asm = FeatureAssembler::new(&tables, Combiner::Hadamard, fallback)?;
        let f = asm.assemble(NodeId(1), NodeId(2))?;
        println!("{} fallback, pair (1, 2):", fallback.as_str());
        for ev in &f.vectors {
            println!("  {:<7} {:?}", ev.source, ev.values);
        }
        println!("  flat   {:?}", f.flatten());
    }
    Ok(())
}
