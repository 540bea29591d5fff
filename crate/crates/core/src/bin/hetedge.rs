use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hetedge::config::PipelineConfig;
use hetedge::edgeops::Combiner;
use hetedge::fusion::ModelKind;
use hetedge::pipeline::{self, Stage};
use hetedge::walks::WalkStrategy;

#[derive(Parser)]
#[command(name = "hetedge", version, about = "Edge embeddings on typed multi-graphs for friend recommendation")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// 1 forces deterministic single-threaded execution.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    strategy: Option<WalkStrategy>,
    #[arg(long, global = true)]
    combiner: Option<Combiner>,
    #[arg(long, global = true)]
    model: Option<ModelKind>,
    /// Extra `key=value` overrides applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write the synthetic benchmark to the configured input paths.
    Synth,
    /// Load the edge list and post-period pairs; write graph and split.
    Ingest,
    /// Generate random-walk corpora.
    Walk,
    /// Train skip-gram embeddings.
    Embed,
    /// Build edge feature sets.
    Features,
    /// Fit the fusion model.
    Train,
    /// Score the test set; print AUC and P@k.
    Eval,
    /// Serve top-k recommendations.
    Recommend,
    /// Run every stage in order.
    Pipeline,
}

impl Command {
    fn stage(self) -> Option<Stage> {
        Some(match self {
            Command::Synth => return None,
            Command::Ingest => Stage::Ingest,
            Command::Walk => Stage::Walk,
            Command::Embed => Stage::Embed,
            Command::Features => Stage::Features,
            Command::Train => Stage::Train,
            Command::Eval => Stage::Eval,
            Command::Recommend => Stage::Recommend,
            Command::Pipeline => Stage::Pipeline,
        })
    }

    fn name(self) -> &'static str {
        self.stage().map_or("synth", Stage::as_str)
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, String> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p).map_err(|e| format!("config {}: {e}", p.display()))?,
        None => PipelineConfig::default(),
    };
    for o in &cli.overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| format!("--set expects KEY=VALUE, got `{o}`"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if let Some(s) = cli.strategy {
        cfg.walk.strategy = s;
    }
    if let Some(c) = cli.combiner {
        cfg.combiner = c;
    }
    if let Some(m) = cli.model {
        cfg.model = m;
    }
    cfg.propagate_seed();
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let name = cli.command.name();
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("hetedge {name}: {e}");
            return ExitCode::FAILURE;
        }
    };
    let result = match cli.command.stage() {
        None => pipeline::write_synthetic(&cfg).map(|b| {
            println!("nodes = {}", b.graph.num_nodes());
            println!("post_edges = {}", b.post_edges.len());
            println!("edges = {}", cfg.edges_path.display());
            println!("post = {}", cfg.post_path.display());
        }),
        Some(stage) => pipeline::run(stage, &cfg).map(|m| {
            for (k, v) in m.entries {
                println!("{k} = {v}");
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hetedge {name}: {e}");
            ExitCode::FAILURE
        }
    }
}
