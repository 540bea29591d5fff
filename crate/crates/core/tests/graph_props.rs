use std::collections::BTreeSet;

use hetedge::graph::{load_edge_list, Adjacency, EdgeSchema, MultiGraph, NodeId};
use proptest::prelude::*;

const TYPES: [&str; 3] = ["contact", "friend", "chat"];

fn edge_lines() -> impl Strategy<Value = Vec<(u8, u8, usize)>> {
    prop::collection::vec((0u8..15, 0u8..15, 0usize..3), 0..80)
}

fn load(lines: &[(u8, u8, usize)]) -> MultiGraph {
    let text: String = lines.iter().map(|&(a, b, t)| format!("n{a}\tn{b}\t{}\n", TYPES[t])).collect();
    load_edge_list(text.as_bytes(), EdgeSchema::default()).unwrap().0
}

proptest! {
    #[test]
    fn adjacency_matches_the_deduplicated_edge_set(lines in edge_lines()) {
        let g = load(&lines);
        for (t_idx, name) in TYPES.iter().enumerate() {
            let t = g.schema().require(name).unwrap();
            let want: BTreeSet<(String, String)> = lines
                .iter()
                .filter(|&&(a, b, t)| t == t_idx && a != b)
                .map(|&(a, b, _)| {
                    let (x, y) = (format!("n{a}"), format!("n{b}"));
                    if x < y { (x, y) } else { (y, x) }
                })
                .collect();
            prop_assert_eq!(g.edge_count(t), want.len());
            for u in 0..g.num_nodes() {
                let nb = g.neighbors(NodeId::from(u), t);
                prop_assert!(nb.windows(2).all(|w| w[0] < w[1]));
                for &v in nb {
                    prop_assert!(v.index() != u);
                    prop_assert!(g.neighbors(v, t).contains(&NodeId::from(u)));
                }
            }
        }
    }

    #[test]
    fn per_type_counts_sum_to_total(lines in edge_lines()) {
        let g = load(&lines);
        let sum: usize = g.schema().types().map(|t| g.edge_count(t)).sum();
        prop_assert_eq!(sum, g.total_edge_count());
        let degree_sum: usize = (0..g.num_nodes()).map(|v| g.degree(NodeId::from(v), None).unwrap()).sum();
        prop_assert_eq!(degree_sum, 2 * sum);
    }

    #[test]
    fn split_equals_typed_adjacency(lines in edge_lines()) {
        let g = load(&lines);
        for t in g.schema().types() {
            let h = g.split_by_type(t).unwrap();
            prop_assert_eq!(h.num_nodes(), g.num_nodes());
            for v in 0..g.num_nodes() {
                prop_assert_eq!(h.neighbors(NodeId::from(v)), g.neighbors(NodeId::from(v), t));
            }
        }
    }

    #[test]
    fn snapshot_round_trips(lines in edge_lines()) {
        let g = load(&lines);
        let mut buf = Vec::new();
        g.write_snapshot(&mut buf).unwrap();
        let back = MultiGraph::read_snapshot(&buf[..]).unwrap();
        prop_assert_eq!(back.fingerprint(), g.fingerprint());
        prop_assert_eq!(back.num_nodes(), g.num_nodes());
        for t in g.schema().types() {
            for v in 0..g.num_nodes() {
                prop_assert_eq!(back.neighbors(NodeId::from(v), t), g.neighbors(NodeId::from(v), t));
            }
        }
        for (id, label) in g.labels().iter() {
            prop_assert_eq!(back.labels().get(label), Some(id));
        }
    }
}
