//! Logistic regression and the multi-tower network on the same edge
//! features, plus the 256-d unified edge embedding.
//!
//! cargo run --release --example fusion_models

use hetedge::config::PipelineConfig;
use hetedge::eval::auc;
use hetedge::fusion::{self, ModelKind, TrainConfig};
use hetedge::pipeline;
use hetedge::synthetic::{generate, SyntheticConfig};

fn main() -> hetedge::Result<()> {
    let mut cfg = PipelineConfig::default();
    cfg.synth = SyntheticConfig { num_nodes: 600, group_size: 75, post_edges: 600, ..Default::default() };
    cfg.walk.walks_per_node = 5;
    cfg.walk.walk_length = 20;
    cfg.sgns.dim = 16;
    cfg.sgns.window = 5;
    cfg.sgns.epochs = 1;
    cfg.propagate_seed();

    let bench = generate(&cfg.synth)?;
    let split = pipeline::split(&bench.graph, &bench.post_edges, &cfg)?;
    let mut tables = Vec::new();
    for space in pipeline::spaces(&bench.graph, &cfg)? {
        let corpus = pipeline::walk(&bench.graph, &space, &cfg)?;
        tables.push(pipeline::embed(&bench.graph, &space, &corpus, &cfg)?);
    }
    let (train, test) = pipeline::features(&tables, &split, &cfg, &bench.graph.fingerprint())?;
    println!("{} train rows, {} test rows, {} features in {} towers", train.len(), test.len(), train.width(), train.num_types());

    for (kind, tc) in [
        (ModelKind::LogReg, TrainConfig { learning_rate: 0.5, epochs: 100, ..Default::default() }),
        (ModelKind::Mtn, TrainConfig { learning_rate: 0.05, batch_size: 32, epochs: 10, ..Default::default() }),
    ] {
        let (model, report) = fusion::train(kind, &train, &tc)?;
        let scores = (0..test.len()).map(|i| model.predict_flat(test.row(i))).collect::<hetedge::Result<Vec<_>>>()?;
        println!("{kind}: test auc {:.4}, best epoch {}", auc(&scores, &test.labels)?, report.best_epoch);
        if let fusion::FusionModel::Mtn(net) = &model {
            let (p, unified) = net.forward(test.row(0))?;
            let active = unified.iter().filter(|&&x| x > 0.0).count();
            println!("  first test pair: p = {p:.3}, unified embedding {} wide, {active} active units", unified.len());
        }
    }
    Ok(())
}
