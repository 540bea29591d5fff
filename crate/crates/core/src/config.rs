//! Flat `key = value` pipeline configuration.
//!
//! Keys carry a section prefix (`walk.p`, `sgns.dim`, ...). `#` starts a
//! comment. Unknown keys are errors so typos do not go unnoticed.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::edgeops::{Combiner, Fallback};
use crate::error::{Error, Result};
use crate::fusion::{ModelKind, TrainConfig};
use crate::graph::EdgeSchema;
use crate::rng::derive_seed;
use crate::serving::ServingConfig;
use crate::sgns::SgnsConfig;
use crate::synthetic::SyntheticConfig;
use crate::walks::{WalkConfig, WalkStrategy};

const WALK_SEED: u64 = 1;
const SGNS_SEED: u64 = 2;
const SPLIT_SEED: u64 = 3;
const TRAIN_SEED: u64 = 4;
const SYNTH_SEED: u64 = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    /// 1 means deterministic single-threaded execution.
    pub threads: usize,
    pub schema: Vec<String>,
    pub closed_schema: bool,
    /// Edge type being predicted.
    pub target: String,
    pub edges_path: PathBuf,
    pub post_path: PathBuf,
    pub out_dir: PathBuf,
    pub walk: WalkConfig,
    pub sgns: SgnsConfig,
    /// Subnetworks to embed; empty means every type in the schema.
    pub embed_types: Vec<String>,
    pub combiner: Combiner,
    pub fallback: Fallback,
    /// Negatives per positive.
    pub neg_ratio: f64,
    pub test_fraction: f64,
    pub model: ModelKind,
    pub train: TrainConfig,
    pub eval_k: usize,
    pub serving: ServingConfig,
    pub serve_k: usize,
    /// Number of users served in the batch run; 0 means every user.
    pub serve_users: usize,
    pub persist_bloom: bool,
    pub synth: SyntheticConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let mut cfg = PipelineConfig {
            seed: 0,
            threads: 1,
            schema: EdgeSchema::default().names().to_vec(),
            closed_schema: true,
            target: "friend".into(),
            edges_path: "edges.tsv".into(),
            post_path: "post.tsv".into(),
            out_dir: "out".into(),
            walk: WalkConfig::default(),
            sgns: SgnsConfig::default(),
            embed_types: Vec::new(),
            combiner: Combiner::Concatenate,
            fallback: Fallback::Zero,
            neg_ratio: 1.0,
            test_fraction: 0.2,
            model: ModelKind::Mtn,
            train: TrainConfig::default(),
            eval_k: 5,
            serving: ServingConfig::default(),
            serve_k: 5,
            serve_users: 0,
            persist_bloom: false,
            synth: SyntheticConfig::default(),
        };
        cfg.walk.strategy = WalkStrategy::Node2Vec;
        cfg.propagate_seed();
        cfg
    }
}

fn value<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("invalid value `{v}` for `{key}`"))
}

fn flag(key: &str, v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("invalid value `{v}` for `{key}`: expected true or false")),
    }
}

fn list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn named<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e: T::Err| format!("`{key}`: {e}"))
}

impl PipelineConfig {
    /// Parses config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::parse(i + 1, "expected `key = value`"))?;
            cfg.set(k.trim(), v.trim()).map_err(|m| Error::parse(i + 1, m))?;
        }
        cfg.propagate_seed();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one key. Call [`propagate_seed`](Self::propagate_seed) after
    /// changing `seed`.
    pub fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        match key {
            "seed" => self.seed = value(key, v)?,
            "threads" => self.threads = value(key, v)?,
            "schema" => self.schema = list(v),
            "schema.closed" => self.closed_schema = flag(key, v)?,
            "target" => self.target = v.into(),
            "paths.edges" => self.edges_path = v.into(),
            "paths.post" => self.post_path = v.into(),
            "paths.out" => self.out_dir = v.into(),
            "walk.strategy" => self.walk.strategy = named(key, v)?,
            "walk.walks_per_node" => self.walk.walks_per_node = value(key, v)?,
            "walk.length" => self.walk.walk_length = value(key, v)?,
            "walk.p" => self.walk.p = value(key, v)?,
            "walk.q" => self.walk.q = value(key, v)?,
            "sgns.dim" => self.sgns.dim = value(key, v)?,
            "sgns.window" => self.sgns.window = value(key, v)?,
            "sgns.negatives" => self.sgns.negatives = value(key, v)?,
            "sgns.lr" => self.sgns.learning_rate = value(key, v)?,
            "sgns.epochs" => self.sgns.epochs = value(key, v)?,
            "embed.types" => self.embed_types = list(v),
            "features.combiner" => self.combiner = named(key, v)?,
            "features.fallback" => self.fallback = named(key, v)?,
            "split.neg_ratio" => self.neg_ratio = value(key, v)?,
            "split.test_fraction" => self.test_fraction = value(key, v)?,
            "train.model" => self.model = named(key, v)?,
            "train.lr" => self.train.learning_rate = value(key, v)?,
            "train.batch" => self.train.batch_size = value(key, v)?,
            "train.epochs" => self.train.epochs = value(key, v)?,
            "train.validation" => self.train.validation_fraction = value(key, v)?,
            "eval.k" => self.eval_k = value(key, v)?,
            "serve.pool" => self.serving.pool_size = value(key, v)?,
            "serve.index_table" => self.serving.index_table = v.into(),
            "serve.k" => self.serve_k = value(key, v)?,
            "serve.users" => self.serve_users = value(key, v)?,
            "serve.bits_per_item" => self.serving.bits_per_item = value(key, v)?,
            "serve.expected_items" => self.serving.expected_items = value(key, v)?,
            "serve.persist_bloom" => self.persist_bloom = flag(key, v)?,
            "synth.nodes" => self.synth.num_nodes = value(key, v)?,
            "synth.communities" => self.synth.communities = value(key, v)?,
            "synth.group_size" => self.synth.group_size = value(key, v)?,
            "synth.friend_degree" => self.synth.friend_degree = value(key, v)?,
            "synth.chat_degree" => self.synth.chat_degree = value(key, v)?,
            "synth.contact_degree" => self.synth.contact_degree = value(key, v)?,
            "synth.mixing" => self.synth.mixing = value(key, v)?,
            "synth.post_edges" => self.synth.post_edges = value(key, v)?,
            "synth.chat_signal" => self.synth.chat_signal = value(key, v)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Derives every stage seed from the global seed.
    pub fn propagate_seed(&mut self) {
        self.walk.seed = derive_seed(self.seed, &[WALK_SEED]);
        self.sgns.seed = derive_seed(self.seed, &[SGNS_SEED]);
        self.train.seed = derive_seed(self.seed, &[TRAIN_SEED]);
        self.synth.seed = derive_seed(self.seed, &[SYNTH_SEED]);
    }

    pub fn split_seed(&self) -> u64 {
        derive_seed(self.seed, &[SPLIT_SEED])
    }

    pub fn schema(&self) -> Result<EdgeSchema> {
        if self.closed_schema {
            EdgeSchema::closed(self.schema.iter().map(String::as_str))
        } else {
            EdgeSchema::open(self.schema.iter().map(String::as_str))
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.walk.validate()?;
        self.sgns.validate()?;
        self.train.validate()?;
        if self.threads == 0 {
            return Err(Error::InvalidConfig("threads must be at least 1".into()));
        }
        if !(self.neg_ratio >= 0.0 && self.neg_ratio.is_finite()) {
            return Err(Error::InvalidConfig("split.neg_ratio must be finite and non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.test_fraction) {
            return Err(Error::InvalidConfig("split.test_fraction must be in [0, 1)".into()));
        }
        if self.eval_k == 0 || self.serve_k == 0 {
            return Err(Error::InvalidConfig("eval.k and serve.k must be at least 1".into()));
        }
        let schema = self.schema()?;
        if self.closed_schema {
            schema.require(&self.target)?;
            for t in &self.embed_types {
                schema.require(t)?;
            }
        }
        Ok(())
    }

    /// Renders every key, suitable for [`parse`](Self::parse).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("seed", self.seed.to_string());
        kv("threads", self.threads.to_string());
        kv("schema", self.schema.join(","));
        kv("schema.closed", self.closed_schema.to_string());
        kv("target", self.target.clone());
        kv("paths.edges", self.edges_path.display().to_string());
        kv("paths.post", self.post_path.display().to_string());
        kv("paths.out", self.out_dir.display().to_string());
        kv("walk.strategy", self.walk.strategy.to_string());
        kv("walk.walks_per_node", self.walk.walks_per_node.to_string());
        kv("walk.length", self.walk.walk_length.to_string());
        kv("walk.p", self.walk.p.to_string());
        kv("walk.q", self.walk.q.to_string());
        kv("sgns.dim", self.sgns.dim.to_string());
        kv("sgns.window", self.sgns.window.to_string());
        kv("sgns.negatives", self.sgns.negatives.to_string());
        kv("sgns.lr", self.sgns.learning_rate.to_string());
        kv("sgns.epochs", self.sgns.epochs.to_string());
        kv("embed.types", self.embed_types.join(","));
        kv("features.combiner", self.combiner.to_string());
        kv("features.fallback", self.fallback.as_str().to_string());
        kv("split.neg_ratio", self.neg_ratio.to_string());
        kv("split.test_fraction", self.test_fraction.to_string());
        kv("train.model", self.model.to_string());
        kv("train.lr", self.train.learning_rate.to_string());
        kv("train.batch", self.train.batch_size.to_string());
        kv("train.epochs", self.train.epochs.to_string());
        kv("train.validation", self.train.validation_fraction.to_string());
        kv("eval.k", self.eval_k.to_string());
        kv("serve.pool", self.serving.pool_size.to_string());
        kv("serve.index_table", self.serving.index_table.clone());
        kv("serve.k", self.serve_k.to_string());
        kv("serve.users", self.serve_users.to_string());
        kv("serve.bits_per_item", self.serving.bits_per_item.to_string());
        kv("serve.expected_items", self.serving.expected_items.to_string());
        kv("serve.persist_bloom", self.persist_bloom.to_string());
        kv("synth.nodes", self.synth.num_nodes.to_string());
        kv("synth.communities", self.synth.communities.to_string());
        kv("synth.group_size", self.synth.group_size.to_string());
        kv("synth.friend_degree", self.synth.friend_degree.to_string());
        kv("synth.chat_degree", self.synth.chat_degree.to_string());
        kv("synth.contact_degree", self.synth.contact_degree.to_string());
        kv("synth.mixing", self.synth.mixing.to_string());
        kv("synth.post_edges", self.synth.post_edges.to_string());
        kv("synth.chat_signal", self.synth.chat_signal.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_text() {
        let cfg = PipelineConfig::default();
        assert_eq!(PipelineConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn keys_override_defaults() {
        let cfg = PipelineConfig::parse("# comment\nwalk.p = 0.25\n\nsgns.dim = 16  # trailing\ntrain.model = logreg\n")
            .unwrap();
        assert_eq!(cfg.walk.p, 0.25);
        assert_eq!(cfg.sgns.dim, 16);
        assert_eq!(cfg.model, ModelKind::LogReg);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = PipelineConfig::parse("seed = 1\nwalk.p = fast\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = PipelineConfig::parse("\n\nnot a pair\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        let e = PipelineConfig::parse("walk.z = 1\n").unwrap_err();
        assert!(e.to_string().contains("unknown key"));
    }

    #[test]
    fn seed_reaches_every_stage() {
        let a = PipelineConfig::parse("seed = 7").unwrap();
        let b = PipelineConfig::parse("seed = 8").unwrap();
        assert_ne!(a.walk.seed, b.walk.seed);
        assert_ne!(a.sgns.seed, b.sgns.seed);
        assert_ne!(a.train.seed, b.train.seed);
        assert_ne!(a.split_seed(), b.split_seed());
        assert_eq!(a, PipelineConfig::parse("seed = 7").unwrap());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(PipelineConfig::parse("walk.q = 0").is_err());
        assert!(PipelineConfig::parse("target = enemy").is_err());
        assert!(PipelineConfig::parse("threads = 0").is_err());
    }
}
