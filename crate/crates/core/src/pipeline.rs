//! End-to-end driver: ingest, split, walk, embed, features, train, evaluate
//! and recommend.
//!
//! Every stage has an in-memory form (used by [`run_in_memory`]) and a file
//! form (used by [`run`]) that reads the previous stage's artifacts from the
//! output directory, checks their provenance and writes its own.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::config::PipelineConfig;
use crate::edgeops::{FeatureAssembler, FeatureSet};
use crate::error::{Error, Result};
use crate::eval::{auc, precision_at_k, rankings_by_user, temporal_split, truth_by_user, MetricsReport, Prediction};
use crate::fusion::{self, FeatureSpec, LabeledPair, LabeledPairSet, ModelArtifact, TrainReport};
use crate::graph::{HomogeneousGraph, IngestReport, MultiGraph, MultiGraphBuilder, NodeId, NodeLabels};
use crate::rng::{derive_seed, rng_from, str_key};
use crate::serving::{read_blooms, write_blooms, write_recommendations, Recommendation, Recommender};
use crate::sgns::{train_sgns_with_stats, EmbeddingTable};
use crate::synthetic::{generate, SyntheticBenchmark};
use crate::walks::{generate_corpus, WalkCorpus, WalkStrategy};

/// Name of the single table learned by the multi-graph walk strategies.
pub const MULTI_TABLE: &str = "multi";

const SPLIT_HEADER: &str = "# HETEDGE-SPLIT v1";
const EMB_META_HEADER: &str = "HETEDGE-EMB v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Walk,
    Embed,
    Features,
    Train,
    Eval,
    Recommend,
    Pipeline,
}

impl Stage {
    pub const ORDER: [Stage; 7] =
        [Stage::Ingest, Stage::Walk, Stage::Embed, Stage::Features, Stage::Train, Stage::Eval, Stage::Recommend];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Walk => "walk",
            Stage::Embed => "embed",
            Stage::Features => "features",
            Stage::Train => "train",
            Stage::Eval => "eval",
            Stage::Recommend => "recommend",
            Stage::Pipeline => "pipeline",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ORDER
            .iter()
            .chain(&[Stage::Pipeline])
            .copied()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown stage `{s}`")))
    }
}

/// Artifact locations inside the output directory.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub dir: PathBuf,
}

impl Artifacts {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Artifacts { dir: dir.into() }
    }

    pub fn graph(&self) -> PathBuf {
        self.dir.join("graph.snap")
    }

    pub fn split(&self) -> PathBuf {
        self.dir.join("split.tsv")
    }

    pub fn corpus(&self, space: &str) -> PathBuf {
        self.dir.join(format!("walks.{space}.txt"))
    }

    pub fn embedding(&self, space: &str) -> PathBuf {
        self.dir.join(format!("emb.{space}.txt"))
    }

    pub fn embedding_meta(&self, space: &str) -> PathBuf {
        self.dir.join(format!("emb.{space}.meta"))
    }

    pub fn features(&self, part: &str) -> PathBuf {
        self.dir.join(format!("features.{part}.bin"))
    }

    pub fn model(&self) -> PathBuf {
        self.dir.join("model.txt")
    }

    pub fn predictions(&self) -> PathBuf {
        self.dir.join("predictions.tsv")
    }

    pub fn metrics(&self) -> PathBuf {
        self.dir.join("metrics.txt")
    }

    pub fn recommendations(&self) -> PathBuf {
        self.dir.join("recommendations.txt")
    }

    pub fn blooms(&self) -> PathBuf {
        self.dir.join("blooms.bin")
    }
}

// ---------------------------------------------------------------------------
// In-memory stages
// ---------------------------------------------------------------------------

/// Reads `src<TAB>dst` pairs, interning labels into `builder`.
pub fn ingest_pairs<R: BufRead>(reader: R, builder: &mut MultiGraphBuilder) -> Result<Vec<(NodeId, NodeId)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [a, b] = f.as_slice() else {
            return Err(Error::parse(i + 1, format!("expected 2 tab-separated fields, found {}", f.len())));
        };
        let u = builder.add_node(a).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        let v = builder.add_node(b).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        if u == v {
            return Err(Error::parse(i + 1, format!("self-pair on `{a}`")));
        }
        out.push((u, v));
    }
    Ok(out)
}

/// Builds the pre-period graph from the edge list and registers every node
/// named in the post-period pairs.
pub fn ingest<E: BufRead, P: BufRead>(
    edges: E,
    post: P,
    cfg: &PipelineConfig,
) -> Result<(MultiGraph, Vec<(NodeId, NodeId)>, IngestReport)> {
    let mut builder = MultiGraphBuilder::new(cfg.schema()?);
    let report = builder.ingest(edges)?;
    let pairs = ingest_pairs(post, &mut builder)?;
    Ok((builder.build(), pairs, report))
}

/// Labeled train and test pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub train: LabeledPairSet,
    pub test: LabeledPairSet,
}

/// Temporal split with `neg_ratio` negatives per positive, then a stratified
/// train/test partition.
pub fn split(graph: &MultiGraph, post: &[(NodeId, NodeId)], cfg: &PipelineConfig) -> Result<Split> {
    let target = graph.schema().require(&cfg.target)?;
    let unique: HashSet<(NodeId, NodeId)> = post.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    let neg_count = (unique.len() as f64 * cfg.neg_ratio).round() as usize;
    let mut rng = rng_from(cfg.split_seed(), &[]);
    let ts = temporal_split(graph.clone(), target, post, neg_count, &mut rng)?;
    let (train, test) = ts.partition(cfg.test_fraction, &mut rng)?;
    Ok(Split { train, test })
}

/// One embedding space: a homogeneous subgraph or the whole multi-graph.
#[derive(Clone, Debug)]
pub struct Space {
    pub name: String,
    /// `None` for the multi-graph strategies.
    pub subgraph: Option<HomogeneousGraph>,
}

impl Space {
    pub fn fingerprint(&self, graph: &MultiGraph) -> String {
        match &self.subgraph {
            Some(h) => h.fingerprint(),
            None => graph.fingerprint(),
        }
    }
}

pub fn is_multi_strategy(s: WalkStrategy) -> bool {
    matches!(s, WalkStrategy::Hetero | WalkStrategy::UniformBias)
}

/// Embedding spaces for the configured strategy, in schema order.
pub fn spaces(graph: &MultiGraph, cfg: &PipelineConfig) -> Result<Vec<Space>> {
    if is_multi_strategy(cfg.walk.strategy) {
        return Ok(vec![Space { name: MULTI_TABLE.into(), subgraph: None }]);
    }
    let names: Vec<String> = if cfg.embed_types.is_empty() {
        graph.schema().names().to_vec()
    } else {
        let wanted: BTreeSet<&str> = cfg.embed_types.iter().map(String::as_str).collect();
        graph.schema().names().iter().filter(|n| wanted.contains(n.as_str())).cloned().collect()
    };
    if names.is_empty() {
        return Err(Error::InvalidConfig("no edge types selected for embedding".into()));
    }
    names.into_iter().map(|n| Ok(Space { subgraph: Some(graph.split_by_name(&n)?), name: n })).collect()
}

pub fn walk(graph: &MultiGraph, space: &Space, cfg: &PipelineConfig) -> Result<WalkCorpus> {
    let mut wc = cfg.walk.clone();
    wc.seed = derive_seed(cfg.walk.seed, &[str_key(&space.name)]);
    match &space.subgraph {
        Some(h) => generate_corpus(h, &wc, cfg.threads),
        None => generate_corpus(graph, &wc, cfg.threads),
    }
}

pub fn embed(graph: &MultiGraph, space: &Space, corpus: &WalkCorpus, cfg: &PipelineConfig) -> Result<EmbeddingTable> {
    if corpus.graph_hash != space.fingerprint(graph) {
        return Err(Error::artifact(
            format!("corpus for `{}`", space.name),
            "generated from a different graph; rerun the walk stage",
        ));
    }
    let mut sc = cfg.sgns.clone();
    sc.seed = derive_seed(cfg.sgns.seed, &[str_key(&space.name)]);
    let (mut table, stats) = train_sgns_with_stats(corpus, &sc, cfg.threads)?;
    log::info!("embedded `{}`: {} pairs/epoch, loss {:?}", space.name, stats.pairs_per_epoch, stats.epoch_loss);
    mark_active(&mut table, graph, space)?;
    table.set_name(space.name.clone());
    Ok(table)
}

fn mark_active(table: &mut EmbeddingTable, graph: &MultiGraph, space: &Space) -> Result<()> {
    match &space.subgraph {
        Some(h) => table.mark_active_from(h),
        None => table.mark_active_from(&graph.flatten()),
    }
}

pub fn features(tables: &[EmbeddingTable], split: &Split, cfg: &PipelineConfig, graph_hash: &str) -> Result<(FeatureSet, FeatureSet)> {
    let asm = FeatureAssembler::new(tables, cfg.combiner, cfg.fallback)?;
    Ok((FeatureSet::build(&asm, &split.train, graph_hash)?, FeatureSet::build(&asm, &split.test, graph_hash)?))
}

pub fn train(data: &FeatureSet, cfg: &PipelineConfig) -> Result<(ModelArtifact, TrainReport)> {
    let (model, report) = fusion::train(cfg.model, data, &cfg.train)?;
    Ok((ModelArtifact { spec: FeatureSpec::of(data), graph_hash: data.graph_hash.clone(), model }, report))
}

/// Scores the test set. P@k ranks each user's test pairs and keeps users
/// with at least one positive among them.
pub fn evaluate(model: &ModelArtifact, test: &FeatureSet, k: usize) -> Result<(Vec<Prediction>, MetricsReport)> {
    model.check_features(test)?;
    let scores = (0..test.len()).map(|i| model.model.predict_flat(test.row(i))).collect::<Result<Vec<f64>>>()?;
    let auc_value = auc(&scores, &test.labels)?;
    let positives: Vec<(NodeId, NodeId)> =
        test.pairs.iter().zip(&test.labels).filter(|(_, &l)| l).map(|(&p, _)| p).collect();
    let truth = truth_by_user(positives);
    let keep: HashSet<NodeId> = truth.keys().copied().collect();
    let rankings = rankings_by_user(&test.pairs, &scores, Some(&keep));
    let p_at_k = precision_at_k(&rankings, &truth, k)?;

    let mut m = MetricsReport::default();
    m.push("auc", auc_value);
    m.push(&format!("p@{k}"), p_at_k);
    m.push("model", model.model.kind());
    m.push("combiner", model.spec.combiner);
    m.push("types", model.spec.type_names.join(","));
    m.push("test_pairs", test.len());
    m.push("test_positives", test.labels.iter().filter(|&&l| l).count());
    m.push("ranked_users", rankings.len());
    m.push("graph", &model.graph_hash);
    let preds = test
        .pairs
        .iter()
        .zip(&test.labels)
        .zip(&scores)
        .map(|((&(u, v), &label), &score)| Prediction { u, v, label, score })
        .collect();
    Ok((preds, m))
}

/// Users served by the batch recommend run: endpoints of held-out positives,
/// capped at `serve.users` when that is non-zero.
pub fn serve_users(split: &Split, cfg: &PipelineConfig) -> Vec<NodeId> {
    let users: BTreeSet<NodeId> = split.test.iter().filter(|p| p.label).flat_map(|p| [p.u, p.v]).collect();
    let n = if cfg.serve_users == 0 { users.len() } else { cfg.serve_users };
    users.into_iter().take(n).collect()
}

pub fn recommender<'a>(
    graph: &'a MultiGraph,
    tables: &'a [EmbeddingTable],
    model: &'a ModelArtifact,
    cfg: &PipelineConfig,
) -> Result<Recommender<'a>> {
    let mut sc = cfg.serving.clone();
    sc.friend_type = cfg.target.clone();
    sc.fallback = cfg.fallback;
    if tables.len() == 1 && tables[0].name() == MULTI_TABLE {
        sc.index_table = MULTI_TABLE.into();
    }
    Recommender::new(graph, tables, model, sc)
}

pub fn recommend_batch(rec: &mut Recommender<'_>, users: &[NodeId], k: usize) -> Result<Vec<(NodeId, Vec<Recommendation>)>> {
    users.iter().map(|&u| Ok((u, rec.recommend(u, k)?))).collect()
}

/// Everything an in-memory run produces.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub split: Split,
    pub tables: Vec<EmbeddingTable>,
    pub train_features: FeatureSet,
    pub test_features: FeatureSet,
    pub model: ModelArtifact,
    pub train_report: TrainReport,
    pub predictions: Vec<Prediction>,
    pub metrics: MetricsReport,
}

impl Outcome {
    pub fn auc(&self) -> f64 {
        self.metrics.get_f64("auc").expect("auc is always reported")
    }
}

/// Runs split through evaluation without touching the filesystem.
pub fn run_in_memory(graph: &MultiGraph, post: &[(NodeId, NodeId)], cfg: &PipelineConfig) -> Result<Outcome> {
    cfg.validate()?;
    let split = split(graph, post, cfg)?;
    let hash = graph.fingerprint();
    let tables = spaces(graph, cfg)?
        .iter()
        .map(|s| embed(graph, s, &walk(graph, s, cfg)?, cfg))
        .collect::<Result<Vec<_>>>()?;
    let (train_features, test_features) = features(&tables, &split, cfg, &hash)?;
    let (model, train_report) = train(&train_features, cfg)?;
    let (predictions, metrics) = evaluate(&model, &test_features, cfg.eval_k)?;
    Ok(Outcome { split, tables, train_features, test_features, model, train_report, predictions, metrics })
}

// ---------------------------------------------------------------------------
// File stages
// ---------------------------------------------------------------------------

fn open(stage: Stage, path: &Path) -> Result<BufReader<File>> {
    match File::open(path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(Error::MissingArtifact { stage: stage.to_string(), path: path.to_path_buf() })
        }
        Err(e) => Err(e.into()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn finish(mut w: BufWriter<File>) -> Result<()> {
    w.flush()?;
    Ok(())
}

fn load_graph(stage: Stage, a: &Artifacts) -> Result<MultiGraph> {
    MultiGraph::read_snapshot(open(stage, &a.graph())?)
}

fn write_split<W: Write>(mut w: W, graph: &MultiGraph, split: &Split) -> Result<()> {
    writeln!(w, "{SPLIT_HEADER} graph={}", graph.fingerprint())?;
    let labels = graph.labels();
    for (part, set) in [("train", &split.train), ("test", &split.test)] {
        for p in set.iter() {
            writeln!(w, "{}\t{}\t{}\t{part}", labels.label(p.u), labels.label(p.v), p.label as u8)?;
        }
    }
    Ok(())
}

fn read_split<R: BufRead>(r: R, graph: &MultiGraph) -> Result<Split> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::artifact("split", "empty file"))??;
    let hash = header
        .strip_prefix(SPLIT_HEADER)
        .and_then(|rest| rest.trim().strip_prefix("graph="))
        .ok_or_else(|| Error::artifact("split", "missing `HETEDGE-SPLIT v1` header"))?;
    if hash != graph.fingerprint() {
        return Err(Error::artifact("split", "built from a different graph; rerun ingest"));
    }
    let labels = graph.labels();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        let line = line?;
        let f: Vec<&str> = line.split('\t').collect();
        let [u, v, l, part] = f.as_slice() else {
            return Err(Error::parse(i + 2, "expected `u<TAB>v<TAB>label<TAB>part`"));
        };
        let p = LabeledPair { u: labels.require(u)?, v: labels.require(v)?, label: *l == "1" };
        match *part {
            "train" => train.push(p),
            "test" => test.push(p),
            other => return Err(Error::parse(i + 2, format!("unknown part `{other}`"))),
        }
    }
    Ok(Split { train: LabeledPairSet::new(train)?, test: LabeledPairSet::new(test)? })
}

/// Sidecar metadata written next to each embedding file. The embedding file
/// itself keeps the plain `N d` layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingMeta {
    pub name: String,
    pub graph: String,
    pub corpus_graph: String,
    pub strategy: WalkStrategy,
    pub dim: usize,
}

impl EmbeddingMeta {
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{EMB_META_HEADER}")?;
        writeln!(w, "name {}", self.name)?;
        writeln!(w, "graph {}", self.graph)?;
        writeln!(w, "corpus_graph {}", self.corpus_graph)?;
        writeln!(w, "strategy {}", self.strategy)?;
        writeln!(w, "dim {}", self.dim)?;
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
        if lines.first().map(String::as_str) != Some(EMB_META_HEADER) {
            return Err(Error::artifact("embedding metadata", "missing `HETEDGE-EMB v1` header"));
        }
        let field = |key: &str| -> Result<&str> {
            lines
                .iter()
                .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
                .ok_or_else(|| Error::artifact("embedding metadata", format!("missing `{key}`")))
        };
        Ok(EmbeddingMeta {
            name: field("name")?.into(),
            graph: field("graph")?.into(),
            corpus_graph: field("corpus_graph")?.into(),
            strategy: field("strategy")?.parse()?,
            dim: field("dim")?.parse().map_err(|_| Error::artifact("embedding metadata", "bad dim"))?,
        })
    }
}

fn load_tables(stage: Stage, a: &Artifacts, graph: &MultiGraph, cfg: &PipelineConfig) -> Result<Vec<EmbeddingTable>> {
    let hash = graph.fingerprint();
    spaces(graph, cfg)?
        .iter()
        .map(|s| {
            let meta = EmbeddingMeta::read(open(stage, &a.embedding_meta(&s.name))?)?;
            if meta.graph != hash || meta.corpus_graph != s.fingerprint(graph) {
                return Err(Error::artifact(
                    format!("embedding `{}`", s.name),
                    "trained on a different graph; rerun walk and embed",
                ));
            }
            let mut t = EmbeddingTable::read_text(open(stage, &a.embedding(&s.name))?, graph.labels(), s.name.clone())?;
            mark_active(&mut t, graph, s)?;
            Ok(t)
        })
        .collect()
}

fn load_model(stage: Stage, a: &Artifacts) -> Result<ModelArtifact> {
    ModelArtifact::read(open(stage, &a.model())?)
}

fn load_features(stage: Stage, a: &Artifacts, part: &str) -> Result<FeatureSet> {
    FeatureSet::read_binary(open(stage, &a.features(part))?)
}

fn stage_ingest(cfg: &PipelineConfig, a: &Artifacts) -> Result<MetricsReport> {
    let edges = open(Stage::Ingest, &cfg.edges_path)?;
    let post = open(Stage::Ingest, &cfg.post_path)?;
    let (graph, pairs, report) = ingest(edges, post, cfg)?;
    let split = split(&graph, &pairs, cfg)?;
    let mut w = create(&a.graph())?;
    graph.write_snapshot(&mut w)?;
    finish(w)?;
    let mut w = create(&a.split())?;
    write_split(&mut w, &graph, &split)?;
    finish(w)?;

    let mut m = MetricsReport::default();
    m.push("nodes", graph.num_nodes());
    for t in graph.schema().types() {
        m.push(&format!("edges.{}", graph.schema().name(t)), graph.edge_count(t));
    }
    m.push("self_loops_skipped", report.self_loops.len());
    m.push("train_pairs", split.train.len());
    m.push("test_pairs", split.test.len());
    m.push("graph", graph.fingerprint());
    Ok(m)
}

fn stage_walk(cfg: &PipelineConfig, a: &Artifacts) -> Result<MetricsReport> {
    let graph = load_graph(Stage::Walk, a)?;
    let mut m = MetricsReport::default();
    for s in spaces(&graph, cfg)? {
        let corpus = walk(&graph, &s, cfg)?;
        let mut w = create(&a.corpus(&s.name))?;
        corpus.write(&mut w, graph.labels())?;
        finish(w)?;
        m.push(&format!("walks.{}", s.name), corpus.len());
        m.push(&format!("tokens.{}", s.name), corpus.num_tokens());
    }
    Ok(m)
}

fn stage_embed(cfg: &PipelineConfig, a: &Artifacts) -> Result<MetricsReport> {
    let graph = load_graph(Stage::Embed, a)?;
    let mut m = MetricsReport::default();
    for s in spaces(&graph, cfg)? {
        let corpus = WalkCorpus::read(open(Stage::Embed, &a.corpus(&s.name))?, graph.labels())?;
        let table = embed(&graph, &s, &corpus, cfg)?;
        let mut w = create(&a.embedding(&s.name))?;
        table.write_text(&mut w, graph.labels())?;
        finish(w)?;
        let meta = EmbeddingMeta {
            name: s.name.clone(),
            graph: graph.fingerprint(),
            corpus_graph: corpus.graph_hash.clone(),
            strategy: corpus.strategy,
            dim: table.dim(),
        };
        let mut w = create(&a.embedding_meta(&s.name))?;
        meta.write(&mut w)?;
        finish(w)?;
        let active = (0..table.num_nodes()).filter(|&i| table.is_active(NodeId::from(i))).count();
        m.push(&format!("active.{}", s.name), active);
    }
    Ok(m)
}

fn stage_features(cfg: &PipelineConfig, a: &Artifacts) -> Result<MetricsReport> {
    let graph = load_graph(Stage::Features, a)?;
    let split = read_split(open(Stage::Features, &a.split())?, &graph)?;
    let tables = load_tables(Stage::Features, a, &graph, cfg)?;
    let (train_fs, test_fs) = features(&tables, &split, cfg, &graph.fingerprint())?;
    for (part, fs) in [("train", &train_fs), ("test", &test_fs)] {
        let mut w = create(&a.features(part))?;
        fs.write_binary(&mut w)?;
        finish(w)?;
    }
    let mut m = MetricsReport::default();
    m.push("width", train_fs.width());
    m.push("train_rows", train_fs.len());
    m.push("test_rows", test_fs.len());
    Ok(m)
}

fn stage_train(cfg: &PipelineConfig, a: &Artifacts) -> Result<MetricsReport> {
    let data = load_features(Stage::Train, a, "train")?;
    let (model, report) = train(&data, cfg)?;
    let mut w = create(&a.model())?;
    model.write(&mut w)?;
    finish(w)?;
    let mut m = MetricsReport::default();
    m.push("model", model.model.kind());
    m.push("best_epoch", report.best_epoch);
    if let Some(l) = report.epoch_loss.last() {
        m.push("final_loss", l);
    }
    if let Some(v) = report.val_auc.get(report.best_epoch) {
        m.push("val_auc", v);
    }
    Ok(m)
}

fn stage_eval(cfg: &PipelineConfig, a: &Artifacts) -> Result<MetricsReport> {
    let model = load_model(Stage::Eval, a)?;
    let test = load_features(Stage::Eval, a, "test")?;
    if model.graph_hash != test.graph_hash {
        return Err(Error::artifact("model", "trained on features from a different graph; rerun train"));
    }
    let graph = load_graph(Stage::Eval, a)?;
    let (preds, metrics) = evaluate(&model, &test, cfg.eval_k)?;
    let mut w = create(&a.predictions())?;
    crate::eval::write_predictions(&mut w, graph.labels(), &preds)?;
    finish(w)?;
    let mut w = create(&a.metrics())?;
    metrics.write(&mut w)?;
    finish(w)?;
    Ok(metrics)
}

fn stage_recommend(cfg: &PipelineConfig, a: &Artifacts) -> Result<MetricsReport> {
    let graph = load_graph(Stage::Recommend, a)?;
    let model = load_model(Stage::Recommend, a)?;
    if model.graph_hash != graph.fingerprint() {
        return Err(Error::artifact("model", "trained on a different graph; rerun features and train"));
    }
    let tables = load_tables(Stage::Recommend, a, &graph, cfg)?;
    let split = read_split(open(Stage::Recommend, &a.split())?, &graph)?;
    let mut rec = recommender(&graph, &tables, &model, cfg)?;
    if cfg.persist_bloom && a.blooms().exists() {
        rec.set_blooms(read_blooms(open(Stage::Recommend, &a.blooms())?)?);
    }
    let users = serve_users(&split, cfg);
    let batch = recommend_batch(&mut rec, &users, cfg.serve_k)?;
    let mut w = create(&a.recommendations())?;
    write_recommendations(&mut w, graph.labels(), &batch)?;
    finish(w)?;
    if cfg.persist_bloom {
        let mut w = create(&a.blooms())?;
        write_blooms(&mut w, rec.blooms())?;
        finish(w)?;
    }

    let truth = truth_by_user(split.train.iter().chain(split.test.iter()).filter(|p| p.label).map(|p| (p.u, p.v)));
    let rankings: Vec<_> =
        batch.iter().map(|(u, c)| crate::eval::UserRanking { user: *u, candidates: c.clone() }).collect();
    let mut m = MetricsReport::default();
    m.push("users", users.len());
    m.push("served", batch.iter().map(|(_, c)| c.len()).sum::<usize>());
    match precision_at_k(&rankings, &truth, cfg.serve_k) {
        Ok(p) => m.push(&format!("served_p@{}", cfg.serve_k), p),
        Err(Error::NoUsers) => m.push(&format!("served_p@{}", cfg.serve_k), "nan"),
        Err(e) => return Err(e),
    }
    Ok(m)
}

/// Runs one stage (or all of them for [`Stage::Pipeline`]) against the
/// artifacts in `cfg.out_dir`.
pub fn run(stage: Stage, cfg: &PipelineConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    let a = Artifacts::new(&cfg.out_dir);
    match stage {
        Stage::Ingest => stage_ingest(cfg, &a),
        Stage::Walk => stage_walk(cfg, &a),
        Stage::Embed => stage_embed(cfg, &a),
        Stage::Features => stage_features(cfg, &a),
        Stage::Train => stage_train(cfg, &a),
        Stage::Eval => stage_eval(cfg, &a),
        Stage::Recommend => stage_recommend(cfg, &a),
        Stage::Pipeline => {
            let mut all = MetricsReport::default();
            for s in Stage::ORDER {
                let m = run(s, cfg)?;
                all.entries.extend(m.entries.into_iter().map(|(k, v)| (format!("{s}.{k}"), v)));
            }
            Ok(all)
        }
    }
}

/// Generates the synthetic benchmark and writes its edge list and post-period
/// pairs to the configured input paths.
pub fn write_synthetic(cfg: &PipelineConfig) -> Result<SyntheticBenchmark> {
    let bench = generate(&cfg.synth)?;
    let mut w = create(&cfg.edges_path)?;
    bench.write_edge_list(&mut w)?;
    finish(w)?;
    let mut w = create(&cfg.post_path)?;
    bench.write_post_edges(&mut w)?;
    finish(w)?;
    Ok(bench)
}

/// Labels used in an artifact directory, for callers that want to decode
/// recommendation or prediction files.
pub fn artifact_labels(cfg: &PipelineConfig) -> Result<NodeLabels> {
    Ok(load_graph(Stage::Pipeline, &Artifacts::new(&cfg.out_dir))?.labels().clone())
}
