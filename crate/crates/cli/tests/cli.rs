use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use commscore::nlp::{hash_embed, write_embeddings, Corpus, EmbeddingStore};
use serde_json::Value;

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commscore")).args(args).current_dir(cwd).output().unwrap()
}

fn small_synth(dir: &Path) {
    let out =
        run(&["synth", "--out", "syn", "--set", "synth.nodes_per_community=60", "--set", "synth.tweets_mean=20"], dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

const BASE: &str =
    "edges = syn/edges.csv\ntweets = syn/tweets.jsonl\nalgorithms = louvain\nn_train = cap:200\nn_test = 200\n";

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.conf"), "edges = x.csv\nno_such_key = 1\n").unwrap();
    let out = run(&["--config", "bad.conf", "detect"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_key"));
}

#[test]
fn malformed_edge_list_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("edges.csv"), "src,dst,weight\na,b,notanumber\n").unwrap();
    let out = run(&["--set", "edges=edges.csv", "ingest", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn embedding_file_matches_builtin_hash() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    small_synth(root);
    let corpus =
        Corpus::read_jsonl(std::io::BufReader::new(fs::File::open(root.join("syn/tweets.jsonl")).unwrap())).unwrap();
    let dim = 256;
    let mut ids = Vec::new();
    let mut vectors = Vec::new();
    for m in corpus.messages() {
        ids.push(m.message_id.clone());
        vectors.extend(hash_embed::<f32>(&m.text, dim));
    }
    write_embeddings(&root.join("emb.bin"), &EmbeddingStore::new(dim, ids, vectors).unwrap()).unwrap();

    fs::write(root.join("run.conf"), BASE).unwrap();
    let builtin =
        run(&["--config", "run.conf", "--set", "embeddings=builtin-hash:256", "evaluate", "--out", "a"], root);
    assert!(builtin.status.success(), "{}", String::from_utf8_lossy(&builtin.stderr));
    let file = run(&["--config", "run.conf", "--set", "embeddings=emb.bin", "evaluate", "--out", "b"], root);
    assert!(file.status.success(), "{}", String::from_utf8_lossy(&file.stderr));

    let a: Value = serde_json::from_slice(&fs::read(root.join("a/reports/louvain_1.json")).unwrap()).unwrap();
    let b: Value = serde_json::from_slice(&fs::read(root.join("b/reports/louvain_1.json")).unwrap()).unwrap();
    assert_eq!(a["precision"], b["precision"]);
    assert_eq!(a["bins"], b["bins"]);
    assert_eq!(
        fs::read(root.join("a/reports/louvain_1.users.csv")).unwrap(),
        fs::read(root.join("b/reports/louvain_1.users.csv")).unwrap()
    );
}

#[test]
fn embedding_file_missing_rows_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    small_synth(root);
    let store = EmbeddingStore::new(16, vec!["t0000000".into()], hash_embed::<f32>("x y", 16)).unwrap();
    write_embeddings(&root.join("emb.bin"), &store).unwrap();
    fs::write(root.join("run.conf"), BASE).unwrap();
    let out = run(&["--config", "run.conf", "--set", "embeddings=emb.bin", "evaluate", "--out", "o"], root);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_requires_a_grid() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    small_synth(root);
    fs::write(root.join("run.conf"), BASE).unwrap();
    let out = run(&["--config", "run.conf", "sweep", "--out", "o"], root);
    assert_eq!(out.status.code(), Some(2));
}
