//! AUC and precision@k on hand-made scores, then the temporal split with
//! friend-only negatives.
//!
//! cargo run --example evaluate_link_prediction

use std::collections::{HashMap, HashSet};

use hetedge::eval::{auc, precision_at_k, temporal_split, truth_by_user, UserRanking};
use hetedge::graph::{EdgeSchema, MultiGraphBuilder, NodeId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hetedge::Result<()> {
    let scores = [0.9, 0.8, 0.8, 0.4, 0.3, 0.1];
    let labels = [true, true, false, true, false, false];
    // one tie between a positive and a negative counts half
    println!("auc {:.4}", auc(&scores, &labels)?);
    println!("single-class input: {}", auc(&[0.2, 0.7], &[true, true]).unwrap_err());

    let truth: HashMap<NodeId, HashSet<NodeId>> = truth_by_user([(NodeId(0), NodeId(5)), (NodeId(0), NodeId(7)), (NodeId(1), NodeId(3))]);
    let rankings = [
        UserRanking { user: NodeId(0), candidates: vec![(NodeId(5), 0.9), (NodeId(6), 0.8), (NodeId(7), 0.5)] },
        UserRanking { user: NodeId(1), candidates: vec![(NodeId(2), 0.6)] },
    ];
    println!("p@2 {:.4}", precision_at_k(&rankings, &truth, 2)?);

    let mut b = MultiGraphBuilder::new(EdgeSchema::default());
    for (u, v, t) in [("a", "b", "friend"), ("a", "c", "chat"), ("b", "c", "contact"), ("c", "d", "friend"), ("d", "e", "chat")] {
        b.add_edge(u, v, t)?;
    }
    let g = b.build();
    let id = |l: &str| g.labels().get(l).unwrap();
    let post = [(id("a"), id("d")), (id("b"), id("e"))];
    let friend = g.schema().require("friend")?;
    let split = temporal_split(g.clone(), friend, &post, 2, &mut ChaCha8Rng::seed_from_u64(3))?;
    for p in split.labeled_pairs().iter() {
        // chat and contact pairs can still be negatives
        println!("  {} {} {}", g.labels().label(p.u), g.labels().label(p.v), p.label as u8);
    }
    Ok(())
}
