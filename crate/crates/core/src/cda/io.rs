//! Partition CSV files.

use std::io::{BufRead, Write};

use super::{CdaError, LabeledPartition, Partition};
use crate::graph::Graph;

/// Write `node_id,community_id` rows.
pub fn write_partition<F, W: Write>(graph: &Graph<F>, partition: &Partition, writer: W) -> Result<(), CdaError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["node_id", "community_id"]).map_err(fmt_err)?;
    for (i, id) in graph.ids().iter().enumerate() {
        w.write_record([id.as_str(), &partition.module_of(i).to_string()]).map_err(fmt_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Write `node_id,category` rows preceded by a `#` line naming the source
/// algorithm, its parameter and `n_cut`.
pub fn write_labeled_partition<F, W: Write>(
    graph: &Graph<F>,
    labeled: &LabeledPartition,
    algorithm: &str,
    parameter: &str,
    mut writer: W,
) -> Result<(), CdaError> {
    writeln!(writer, "# algorithm={algorithm} parameter={parameter} n_cut={}", labeled.n_cut)?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["node_id", "category"]).map_err(fmt_err)?;
    for (i, id) in graph.ids().iter().enumerate() {
        w.write_record([id.as_str(), &labeled.category(i).to_string()]).map_err(fmt_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a `node_id,community_id` file against `graph`. Every graph node must
/// appear exactly once; community ids are relabeled by first appearance in
/// node order.
pub fn read_partition<F, R: BufRead>(graph: &Graph<F>, reader: R) -> Result<Partition, CdaError> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let mut labels = vec![usize::MAX; graph.node_count()];
    for rec in r.records() {
        let rec = rec.map_err(fmt_err)?;
        let id = rec.get(0).ok_or_else(|| CdaError::Format("missing node_id".into()))?;
        let node = graph.index_of(id).ok_or_else(|| CdaError::Format(format!("unknown node {id:?}")))?;
        let c: usize = rec
            .get(1)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| CdaError::Format(format!("bad community id for {id:?}")))?;
        if labels[node] != usize::MAX {
            return Err(CdaError::Format(format!("node {id:?} listed twice")));
        }
        labels[node] = c;
    }
    if let Some(missing) = labels.iter().position(|&l| l == usize::MAX) {
        return Err(CdaError::Format(format!("node {:?} has no community", graph.id(missing))));
    }
    Ok(Partition::from_labels(&labels))
}

fn fmt_err(e: csv::Error) -> CdaError {
    CdaError::Format(e.to_string())
}
