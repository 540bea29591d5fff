mod common;

use common::{rng, TypedFixture};
use hetedge::graph::{HomogeneousGraph, NodeId};
use hetedge::sgns::{cosine, train_sgns, train_sgns_with_stats, NoiseDistribution, SgnsConfig};
use hetedge::walks::{generate_corpus, WalkConfig, WalkCorpus, WalkStrategy};

fn two_cliques() -> HomogeneousGraph {
    let mut edges = Vec::new();
    for base in [0u32, 5] {
        for a in 0..5 {
            for b in a + 1..5 {
                edges.push((base + a, base + b));
            }
        }
    }
    edges.push((4, 5));
    HomogeneousGraph::from_edges(10, &edges).unwrap()
}

#[test]
fn corpus_has_walks_per_node_sequences_per_node() {
    let g = HomogeneousGraph::from_edges(100, &(0..99).map(|i| (i, i + 1)).collect::<Vec<_>>()).unwrap();
    let c = generate_corpus(&g, &WalkConfig::default(), 1).unwrap();
    assert_eq!(c.len(), 1000);
    for v in 0..100u32 {
        assert_eq!(c.walks.iter().filter(|w| w[0] == NodeId(v)).count(), 10);
    }
    assert!(c.walks.iter().all(|w| w.len() == 30));
}

#[test]
fn isolated_graph_gives_singletons() {
    let g = HomogeneousGraph::from_edges(7, &[]).unwrap();
    let c = generate_corpus(&g, &WalkConfig::default(), 1).unwrap();
    assert!(c.walks.iter().all(|w| w.len() == 1));
}

#[test]
fn corpus_is_deterministic_and_thread_count_invariant() {
    let f = TypedFixture::random(40, 0.1, 31);
    let g = f.graph();
    for strategy in [WalkStrategy::Uniform, WalkStrategy::Node2Vec, WalkStrategy::Hetero, WalkStrategy::UniformBias] {
        let cfg = WalkConfig { strategy, p: 0.5, q: 2.0, seed: 77, ..Default::default() };
        let a = generate_corpus(&g, &cfg, 1).unwrap();
        let b = generate_corpus(&g, &cfg, 1).unwrap();
        let c = generate_corpus(&g, &cfg, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c, "{strategy}");
        let d = generate_corpus(&g, &WalkConfig { seed: 78, ..cfg }, 1).unwrap();
        assert_ne!(a.walks, d.walks);
    }
}

#[test]
fn every_step_follows_an_edge() {
    let f = TypedFixture::random(30, 0.08, 32);
    let g = f.graph();
    let flat = g.flatten();
    use hetedge::graph::Adjacency;
    for strategy in [WalkStrategy::Uniform, WalkStrategy::Node2Vec, WalkStrategy::Hetero, WalkStrategy::UniformBias] {
        let cfg = WalkConfig { strategy, p: 0.3, q: 3.0, ..Default::default() };
        let c = generate_corpus(&g, &cfg, 1).unwrap();
        for w in &c.walks {
            assert!(!w.is_empty() && w.len() <= cfg.walk_length);
            for pair in w.windows(2) {
                assert!(flat.has_edge(pair[0], pair[1]), "{strategy}: {:?}", pair);
            }
        }
    }
    let friend = g.split_by_name("friend").unwrap();
    let c = generate_corpus(&friend, &WalkConfig { strategy: WalkStrategy::Node2Vec, ..Default::default() }, 1).unwrap();
    assert!(c.walks.iter().all(|w| w.windows(2).all(|p| friend.has_edge(p[0], p[1]))));
}

#[test]
fn corpus_file_round_trips() {
    let f = TypedFixture::random(12, 0.2, 33);
    let g = f.graph();
    let c = generate_corpus(&g, &WalkConfig { strategy: WalkStrategy::Hetero, ..Default::default() }, 1).unwrap();
    let mut buf = Vec::new();
    c.write(&mut buf, g.labels()).unwrap();
    assert!(buf.starts_with(b"# HETEDGE-CORPUS v1 strategy=hetero"));
    assert_eq!(WalkCorpus::read(&buf[..], g.labels()).unwrap(), c);
}

#[test]
fn noise_draws_follow_three_quarter_power() {
    let noise = NoiseDistribution::from_counts(&[16, 1]).unwrap();
    let mut r = rng(34);
    let mut counts = [0usize; 2];
    for _ in 0..1_000_000 {
        counts[noise.sample(&mut r).index()] += 1;
    }
    let ratio = counts[0] as f64 / counts[1] as f64;
    assert!((ratio / 8.0 - 1.0).abs() < 0.05, "ratio {ratio}");
}

fn clique_corpus(seed: u64) -> WalkCorpus {
    generate_corpus(&two_cliques(), &WalkConfig { walks_per_node: 20, walk_length: 20, seed, ..Default::default() }, 1).unwrap()
}

fn clique_cfg() -> SgnsConfig {
    SgnsConfig { dim: 16, window: 3, negatives: 5, learning_rate: 0.025, epochs: 5, seed: 35 }
}

#[test]
fn two_cliques_separate_in_embedding_space() {
    let t = train_sgns(&clique_corpus(1), &clique_cfg()).unwrap();
    let side = |v: u32| v < 5;
    let (mut intra, mut inter) = (Vec::new(), Vec::new());
    for a in 0..10u32 {
        for b in a + 1..10 {
            let c = cosine(&t, NodeId(a), NodeId(b)).unwrap().value;
            if side(a) == side(b) {
                intra.push(c);
            } else {
                inter.push(c);
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&intra) > mean(&inter), "intra {} inter {}", mean(&intra), mean(&inter));
}

#[test]
fn first_epoch_loss_falls() {
    let (_, stats) = train_sgns_with_stats(&clique_corpus(2), &clique_cfg(), 1).unwrap();
    assert!(stats.first_epoch_tail < stats.first_epoch_head, "{stats:?}");
    assert!(stats.epoch_loss.last().unwrap() < stats.epoch_loss.first().unwrap());
}

#[test]
fn single_threaded_training_is_reproducible() {
    let corpus = clique_corpus(3);
    let a = train_sgns(&corpus, &clique_cfg()).unwrap();
    let b = train_sgns(&corpus, &clique_cfg()).unwrap();
    assert_eq!(a, b);
    let c = train_sgns(&corpus, &SgnsConfig { seed: 36, ..clique_cfg() }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn concurrent_training_stays_finite() {
    let corpus = clique_corpus(4);
    let (t, stats) = train_sgns_with_stats(&corpus, &clique_cfg(), 4).unwrap();
    assert!((0..10).all(|v| t.row(NodeId(v)).iter().all(|x| x.is_finite())));
    assert_eq!(stats.epoch_loss.len(), 5);
}
