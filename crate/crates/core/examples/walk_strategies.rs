//! The four walk strategies on one small three-type graph.
//!
//! cargo run --example walk_strategies

use hetedge::graph::{EdgeSchema, MultiGraphBuilder};
use hetedge::walks::{generate_corpus, WalkConfig, WalkStrategy};

fn main() -> hetedge::Result<()> {
    let mut b = MultiGraphBuilder::new(EdgeSchema::default());
    for (u, v, t) in [
        ("a", "b", "friend"),
        ("a", "b", "chat"),
        ("a", "b", "contact"),
        ("a", "c", "chat"),
        ("b", "d", "friend"),
        ("c", "d", "contact"),
        ("d", "e", "friend"),
        ("e", "f", "chat"),
    ] {
        b.add_edge(u, v, t)?;
    }
    let g = b.build();
    let friend = g.split_by_name("friend")?;

    for strategy in [WalkStrategy::Uniform, WalkStrategy::Node2Vec, WalkStrategy::Hetero, WalkStrategy::UniformBias] {
        let cfg = WalkConfig { walks_per_node: 1, walk_length: 8, strategy, p: 0.5, q: 2.0, seed: 7 };
        // the homogeneous strategies walk one typed subgraph, the others the whole multi-graph
        let corpus = match strategy {
            WalkStrategy::Uniform | WalkStrategy::Node2Vec => generate_corpus(&friend, &cfg, 1)?,
            _ => generate_corpus(&g, &cfg, 1)?,
        };
        println!("{strategy}: {} walks, {} tokens", corpus.len(), corpus.num_tokens());
        for w in corpus.walks.iter().take(3) {
            let labels: Vec<&str> = w.iter().map(|&v| g.labels().label(v)).collect();
            println!("  {}", labels.join(" "));
        }
    }
    Ok(())
}
