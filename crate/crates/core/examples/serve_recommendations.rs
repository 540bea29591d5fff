//! Nearest-neighbor candidate pools, model re-ranking and bloom-filtered
//! repeat suppression.
//!
//! cargo run --release --example serve_recommendations

use hetedge::config::PipelineConfig;
use hetedge::graph::NodeId;
use hetedge::pipeline::{recommender, run_in_memory};
use hetedge::serving::{analytic_fpr, BloomFilter};
use hetedge::synthetic::{generate, SyntheticConfig};

fn main() -> hetedge::Result<()> {
    let mut cfg = PipelineConfig::default();
    cfg.synth = SyntheticConfig { num_nodes: 400, group_size: 50, post_edges: 400, ..Default::default() };
    cfg.walk.walks_per_node = 5;
    cfg.walk.walk_length = 20;
    cfg.sgns.dim = 16;
    cfg.sgns.window = 5;
    cfg.sgns.epochs = 1;
    cfg.train.learning_rate = 0.05;
    cfg.train.batch_size = 32;
    cfg.train.epochs = 5;
    cfg.serving.pool_size = 30;
    cfg.propagate_seed();

    let bench = generate(&cfg.synth)?;
    let out = run_in_memory(&bench.graph, &bench.post_edges, &cfg)?;
    println!("offline auc {:.4}", out.auc());

    let mut rec = recommender(&bench.graph, &out.tables, &out.model, &cfg)?;
    let user = NodeId(0);
    let label = |v: NodeId| bench.graph.labels().label(v).to_string();
    let pool = rec.index().query(user, 5)?;
    println!("nearest neighbors of {}: {:?}", label(user), pool.iter().map(|&(v, s)| format!("{} {s:.2}", label(v))).collect::<Vec<_>>());
    for round in 1..=3 {
        let list = rec.recommend(user, 5)?;
        println!("round {round}: {:?}", list.iter().map(|&(v, p)| format!("{} {p:.3}", label(v))).collect::<Vec<_>>());
    }
    let seen = rec.bloom(user).map_or(0, BloomFilter::len);
    println!("{} candidates recorded as shown to {}", seen, label(user));

    let f = BloomFilter::with_capacity(1000, 10)?;
    println!(
        "bloom sized for 1000 items at 10 bits each: m = {}, k = {}, expected false-positive rate {:.4}",
        f.num_bits(),
        f.num_hashes(),
        analytic_fpr(f.num_bits(), f.num_hashes(), 1000)
    );
    Ok(())
}
