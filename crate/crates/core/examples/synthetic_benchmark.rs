//! Heterogeneous pipeline versus a friend-only DeepWalk baseline on the
//! planted benchmark.
//!
//! cargo run --release --example synthetic_benchmark -- [seeds] [key=value ...] [baseline.key=value ...]

use std::time::Instant;

use hetedge::config::PipelineConfig;
use hetedge::pipeline::run_in_memory;
use hetedge::synthetic::generate;

fn main() -> hetedge::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let overrides: Vec<String> = args.collect();

    // the same settings the acceptance run uses
    let mut hetero = PipelineConfig::parse(include_str!("benchmark.conf"))?;
    let mut baseline = PipelineConfig::parse(include_str!("baseline.conf"))?;
    let pair = |o: &String| o.split_once('=').map(|(k, v)| (k.to_string(), v.to_string()));
    // `baseline.train.lr=0.5` and the like apply to the baseline only
    for (k, v) in overrides.iter().filter_map(pair) {
        match k.strip_prefix("baseline.") {
            Some(k) => baseline.set(k, &v),
            None => hetero.set(&k, &v),
        }
        .map_err(hetedge::Error::InvalidConfig)?;
    }

    let (mut sum_h, mut sum_b) = (0.0, 0.0);
    for seed in 0..seeds {
        let mut h = hetero.clone();
        let mut b = baseline.clone();
        for c in [&mut h, &mut b] {
            c.seed = seed;
            c.propagate_seed();
        }
        let bench = generate(&h.synth)?;
        let t = Instant::now();
        let oh = run_in_memory(&bench.graph, &bench.post_edges, &h)?;
        let th = t.elapsed();
        let t = Instant::now();
        let ob = run_in_memory(&bench.graph, &bench.post_edges, &b)?;
        let tb = t.elapsed();
        println!(
            "seed {seed}: hetero auc {:.4} p@5 {:.4} ({:.1?})   baseline auc {:.4} p@5 {:.4} ({:.1?})",
            oh.auc(),
            oh.metrics.get_f64("p@5").unwrap_or(f64::NAN),
            th,
            ob.auc(),
            ob.metrics.get_f64("p@5").unwrap_or(f64::NAN),
            tb
        );
        sum_h += oh.auc();
        sum_b += ob.auc();
    }
    let n = seeds as f64;
    println!("mean auc: hetero {:.4}, baseline {:.4}, gap {:+.4}", sum_h / n, sum_b / n, (sum_h - sum_b) / n);
    Ok(())
}
