use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use commscore::cda::{truncate_partition, write_labeled_partition, write_partition, Algorithm, Partition};
use commscore::eval::{
    dendrogram_sweep, evaluate_partition, generate_synthetic, misassigned_intersection, EvalError, EvaluationRun,
};
use commscore::graph::{
    eigencentrality, load_edge_list, quantile_split, to_undirected_max, write_edge_list, AnchorSplit, Graph,
};
use commscore::io::write_atomic;
use commscore::nlp::{load_embeddings, Corpus, Embedder, EmbeddingStore, HashEmbedder, Message, NlpError};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, EmbeddingSource, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Internal(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Data(_) => 3,
            Self::Internal(_) => 4,
        }
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Self::Data(e.to_string())
            }
        }
    )*};
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Internal(e.into())
    }
}

data_error!(commscore::graph::GraphError, commscore::cda::CdaError, NlpError);

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::InvalidParameter(m) => Self::Config(ConfigError::Invalid(m)),
            other => Self::Data(other.to_string()),
        }
    }
}

fn write_out(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, bytes).map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()).into())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(anyhow::Error::from)?;
    bytes.push(b'\n');
    write_out(path, &bytes)
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn job_name(a: Algorithm, p: f64) -> String {
    format!("{}_{p}", a.name())
}

/// Directed edge list → undirected graph, before the degree filter.
fn raw_graph(cfg: &RunConfig) -> Result<Graph<f64>, CliError> {
    let path = cfg.require("edges", &cfg.edges)?;
    let bag = load_edge_list::<f64, _>(open(&path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(to_undirected_max(&bag))
}

/// The analysis graph: `graph` as written by `ingest`, or `edges` put
/// through the ingest rules.
fn load_graph(cfg: &RunConfig) -> Result<Graph<f64>, CliError> {
    let g = match &cfg.graph {
        Some(_) => {
            let path = cfg.require("graph", &cfg.graph)?;
            let bag = load_edge_list::<f64, _>(open(&path)?)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            to_undirected_max(&bag)
        }
        None => raw_graph(cfg)?.filter_min_degree(cfg.min_degree),
    };
    if g.is_empty() {
        return Err(CliError::Data("graph is empty after filtering".into()));
    }
    Ok(g)
}

fn load_corpus(cfg: &RunConfig, graph: &Graph<f64>) -> Result<Corpus, CliError> {
    let path = cfg.require("tweets", &cfg.tweets)?;
    let mut corpus =
        Corpus::read_jsonl(open(&path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let outside: Vec<String> =
        corpus.messages().iter().filter(|m| graph.index_of(&m.user_id).is_none()).map(|m| m.user_id.clone()).collect();
    for u in &outside {
        corpus.flag_external(u);
    }
    if !outside.is_empty() {
        log::info!("{} users outside the graph treated as external", corpus.external_users().len());
    }
    Ok(corpus)
}

enum Source {
    Hash(HashEmbedder),
    Store(EmbeddingStore),
}

impl Embedder<f32> for Source {
    fn dim(&self) -> usize {
        match self {
            Self::Hash(h) => Embedder::<f32>::dim(h),
            Self::Store(s) => Embedder::<f32>::dim(s),
        }
    }

    fn embed(&self, message: &Message) -> Result<Vec<f32>, NlpError> {
        match self {
            Self::Hash(h) => h.embed(message),
            Self::Store(s) => s.embed(message),
        }
    }
}

fn embedder(cfg: &RunConfig) -> Result<Source, CliError> {
    Ok(match &cfg.embeddings {
        EmbeddingSource::Hash(d) => Source::Hash(HashEmbedder::new(*d)?),
        EmbeddingSource::File(p) => {
            if !p.exists() {
                return Err(ConfigError::Invalid(format!("embeddings path {} does not exist", p.display())).into());
            }
            Source::Store(load_embeddings(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?)
        }
    })
}

fn anchors(cfg: &RunConfig, graph: &Graph<f64>) -> Result<AnchorSplit<f64>, CliError> {
    let scores = eigencentrality(graph, cfg.centrality_tol, cfg.centrality_max_iter)?;
    if !scores.converged {
        log::warn!("eigencentrality did not converge in {} iterations", scores.iterations_used);
    }
    Ok(quantile_split(&scores, cfg.anchor_quantile)?)
}

fn jobs(cfg: &RunConfig) -> Vec<(Algorithm, f64)> {
    cfg.algorithms.iter().flat_map(|&a| cfg.grid(a).into_iter().map(move |p| (a, p))).collect()
}

pub fn ingest(cfg: &RunConfig) -> Result<(), CliError> {
    let raw = raw_graph(cfg)?;
    let g = raw.filter_min_degree(cfg.min_degree);
    if g.is_empty() {
        return Err(CliError::Data(format!("no node has degree >= {}", cfg.min_degree)));
    }
    let mut buf = Vec::new();
    write_edge_list(&g, &mut buf)?;
    write_out(&cfg.out.join("graph.csv"), &buf)?;
    buf.clear();
    g.write_node_map(&mut buf)?;
    write_out(&cfg.out.join("nodes.csv"), &buf)?;
    let summary = json!({
        "raw_nodes": raw.node_count(),
        "raw_edges": raw.edge_count(),
        "min_degree": cfg.min_degree,
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "components": g.component_count(),
    });
    write_json(&cfg.out.join("ingest.json"), &summary)?;
    println!("raw graph: {} nodes, {} edges", raw.node_count(), raw.edge_count());
    println!("min_degree {}: {} nodes, {} edges", cfg.min_degree, g.node_count(), g.edge_count());
    Ok(())
}

pub fn detect(cfg: &RunConfig) -> Result<(), CliError> {
    let g = load_graph(cfg)?;
    let n_cut = cfg.pipeline.n_cut;
    let results = jobs(cfg)
        .par_iter()
        .map(|&(a, p)| {
            let seed = cfg.seed_for(a);
            let part = a.run(&g, p, seed)?;
            let lp = truncate_partition(&part, n_cut)?;
            Ok((a, p, seed, part, lp))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut manifest = Vec::new();
    for (a, p, seed, part, lp) in &results {
        let name = job_name(*a, *p);
        let file = format!("partitions/{name}.csv");
        let mut buf = Vec::new();
        write_labeled_partition(&g, lp, a.name(), &p.to_string(), &mut buf)?;
        write_out(&cfg.out.join(&file), &buf)?;
        let modules = format!("partitions/{name}.modules.csv");
        buf.clear();
        write_partition(&g, part, &mut buf)?;
        write_out(&cfg.out.join(&modules), &buf)?;
        let coverage = commscore::eval::coverage(lp);
        println!("{name}: m={} coverage={coverage:.4}", part.module_count());
        manifest.push(json!({
            "algorithm": a.name(),
            "parameter": p,
            "seed": seed,
            "file": file,
            "modules_file": modules,
            "m": part.module_count(),
            "n_cut": n_cut,
            "category_sizes": lp.category_sizes(),
            "coverage": coverage,
        }));
    }
    write_json(&cfg.out.join("manifest.json"), &manifest)
}

fn csv_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn evaluate(cfg: &RunConfig) -> Result<(), CliError> {
    let g = load_graph(cfg)?;
    let corpus = load_corpus(cfg, &g)?;
    let emb = embedder(cfg)?;
    let split = anchors(cfg, &g)?;
    let list = jobs(cfg);
    let runs = list
        .par_iter()
        .map(|&(a, p)| {
            let seed = cfg.seed_for(a);
            let part: Partition = a.run(&g, p, seed)?;
            let mut run: EvaluationRun<f32> =
                evaluate_partition(&g, &corpus, &emb, &split, &part, a.name(), p, &cfg.pipeline).map_err(|e| {
                    match CliError::from(e) {
                        CliError::Data(m) => CliError::Data(format!("{}: {m}", job_name(a, p))),
                        other => other,
                    }
                })?;
            run.report.seeds.insert("cda".to_string(), seed);
            Ok(run)
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut precision_csv = String::from("algorithm,parameter,m,precision,precision_err,coverage");
    for b in &cfg.pipeline.betas {
        write!(precision_csv, ",f_{b}").expect("string write");
    }
    precision_csv.push('\n');
    let mut bins_csv = String::from("algorithm,parameter,bin_lo,bin_hi,users,agree,fraction,poisson_err\n");
    let mut entropy_csv = String::from("algorithm,parameter,tweets,users,mean_entropy,mean_distinct\n");

    for (&(a, p), run) in list.iter().zip(&runs) {
        let r = &run.report;
        let name = job_name(a, p);
        write_json(&cfg.out.join(format!("reports/{name}.json")), r)?;
        let mut users = String::from("user_id,cda_category,nlpca_category,tweets\n");
        for o in &run.outcomes {
            writeln!(users, "{},{},{},{}", o.user_id, o.cda, o.nlpca, o.tweets).expect("string write");
        }
        write_out(&cfg.out.join(format!("reports/{name}.users.csv")), users.as_bytes())?;
        run.ensemble.save(&cfg.out.join(format!("models/{name}")))?;

        write!(precision_csv, "{},{p},{},{},{},{}", a.name(), r.m, r.precision, r.precision_err, r.coverage)
            .expect("string write");
        for v in r.f_beta.values() {
            write!(precision_csv, ",{v}").expect("string write");
        }
        precision_csv.push('\n');
        for b in &r.bins {
            writeln!(
                bins_csv,
                "{},{p},{},{},{},{},{},{}",
                a.name(),
                b.lo,
                b.hi.map(|h| h.to_string()).unwrap_or_default(),
                b.users,
                b.agree,
                csv_opt(b.fraction),
                csv_opt(b.poisson_err)
            )
            .expect("string write");
        }
        for e in &r.entropy_curve {
            writeln!(entropy_csv, "{},{p},{},{},{},{}", a.name(), e.tweets, e.users, e.mean_entropy, e.mean_distinct)
                .expect("string write");
        }
        println!(
            "{name}: m={} precision={:.4}±{:.4} coverage={:.4} tested_users={}",
            r.m, r.precision, r.precision_err, r.coverage, r.tested_users
        );
        if !r.audit.is_clean() {
            return Err(anyhow::anyhow!("dataset audit failed for {name}: {:?}", r.audit).into());
        }
    }

    let mut pairs = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let (a, b) = (job_name(list[i].0, list[i].1), job_name(list[j].0, list[j].1));
            let entry = match misassigned_intersection(&runs[i].outcomes, &runs[j].outcomes) {
                Ok(m) => json!({"a": a, "b": b, "result": m}),
                Err(e) => json!({"a": a, "b": b, "error": e.to_string()}),
            };
            pairs.push(entry);
        }
    }
    write_json(&cfg.out.join("reports/misassignment.json"), &pairs)?;
    write_out(&cfg.out.join("plots/precision.csv"), precision_csv.as_bytes())?;
    write_out(&cfg.out.join("plots/bins.csv"), bins_csv.as_bytes())?;
    write_out(&cfg.out.join("plots/entropy.csv"), entropy_csv.as_bytes())
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let g = load_graph(cfg)?;
    let tracked: Vec<String> = if cfg.tracked.is_empty() {
        anchors(cfg, &g)?.anchor_ids(&g).into_iter().map(str::to_string).collect()
    } else {
        cfg.tracked.clone()
    };
    for &a in &cfg.algorithms {
        let grid = match cfg.grids.get(&a) {
            Some(g) => g.clone(),
            None if a == Algorithm::Infomap => cfg.grid(a),
            None => return Err(ConfigError::Invalid(format!("grid.{} is required for sweep", a.name())).into()),
        };
        let d = dendrogram_sweep(&g, a, &grid, &tracked, cfg.pipeline.n_cut, cfg.seed_for(a))?;
        write_json(&cfg.out.join(format!("dendrograms/{}.json", a.name())), &d.to_json())?;
        println!(
            "{}: communities {:?}, tracked categories {:?}",
            a.name(),
            d.community_counts(),
            d.tracked_category_counts()
        );
    }
    Ok(())
}

pub fn synth(cfg: &RunConfig) -> Result<(), CliError> {
    let s = generate_synthetic::<f64>(&cfg.synth)?;
    let mut buf = Vec::new();
    write_edge_list(&s.graph, &mut buf)?;
    write_out(&cfg.out.join("edges.csv"), &buf)?;
    buf.clear();
    s.corpus.write_jsonl(&mut buf)?;
    write_out(&cfg.out.join("tweets.jsonl"), &buf)?;
    let mut truth = String::from("node_id,community_id\n");
    for (id, c) in &s.user_communities {
        writeln!(truth, "{id},{c}").expect("string write");
    }
    write_out(&cfg.out.join("truth.csv"), truth.as_bytes())?;
    let manifest = json!({
        "config": cfg.synth,
        "users": s.user_communities.len(),
        "nodes": s.graph.node_count(),
        "edges": s.graph.edge_count(),
        "messages": s.corpus.len(),
        "communities": s.truth.module_count(),
    });
    write_json(&cfg.out.join("synth_manifest.json"), &manifest)?;
    println!(
        "synthetic benchmark: {} users, {} edges, {} messages",
        s.user_communities.len(),
        s.graph.edge_count(),
        s.corpus.len()
    );
    Ok(())
}
