//! Load a typed edge list, inspect the per-type subgraphs and build a
//! temporal train/test split.
//!
//! cargo run --example ingest_and_split

use hetedge::config::PipelineConfig;
use hetedge::graph::{Adjacency, MultiGraph};
use hetedge::pipeline;

const EDGES: &str = "\
# src\tdst\ttype
alice\tbob\tfriend
alice\tbob\tchat
alice\tcarol\tcontact
bob\tcarol\tfriend
carol\tdave\tchat
dave\terin\tcontact
erin\tfrank\tfriend
frank\tgrace\tchat
grace\tgrace\tfriend
";

// friendships that formed after the snapshot
const POST: &str = "alice\tdave\nbob\terin\ncarol\tfrank\nheidi\tgrace\n";

fn main() -> hetedge::Result<()> {
    let mut cfg = PipelineConfig::default();
    cfg.neg_ratio = 1.0;
    cfg.test_fraction = 0.5;
    cfg.propagate_seed();

    let (graph, post, report) = pipeline::ingest(EDGES.as_bytes(), POST.as_bytes(), &cfg)?;
    println!(
        "{} lines, {} edges accepted, self-loops skipped on lines {:?}",
        report.lines_read, report.edges_accepted, report.self_loops
    );
    println!("{} nodes (heidi only appears after the snapshot)", graph.num_nodes());
    for t in graph.schema().types() {
        let sub = graph.split_by_type(t)?;
        let alice = graph.labels().require("alice")?;
        let nb: Vec<&str> = sub.neighbors(alice).iter().map(|&v| graph.labels().label(v)).collect();
        println!("  {:<8} {} edges, alice -> {nb:?}", graph.schema().name(t), graph.edge_count(t));
    }

    let mut snap = Vec::new();
    graph.write_snapshot(&mut snap)?;
    let back = MultiGraph::read_snapshot(&snap[..])?;
    assert_eq!(back.fingerprint(), graph.fingerprint());
    println!("snapshot: {} bytes, fingerprint {}", snap.len(), &graph.fingerprint()[..16]);

    let split = pipeline::split(&graph, &post, &cfg)?;
    for (name, set) in [("train", &split.train), ("test", &split.test)] {
        println!("{name}: {} pairs, {} positive", set.len(), set.positives());
        for p in set.iter() {
            println!("  {} {} {}", graph.labels().label(p.u), graph.labels().label(p.v), p.label as u8);
        }
    }
    Ok(())
}
