//! Clustering quality and throughput reporting.
//!
//! Pairwise F1 counts unordered item pairs: a pair is a true positive when
//! both items share a label and a cluster, a false positive when they share
//! only the cluster, and a false negative when they share only the label.
//! Ratios with a zero denominator are reported as 0.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::item::StreamItem;
use crate::model::{AssignmentRecord, ModelState};

pub type LabelMap = HashMap<String, String>;

/// Item id to label for every labeled item.
pub fn label_map<'a>(items: impl IntoIterator<Item = &'a StreamItem>) -> LabelMap {
    items
        .into_iter()
        .filter_map(|it| it.label.clone().map(|l| (it.id.clone(), l)))
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairwiseConfusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseScores {
    pub confusion: PairwiseConfusion,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl PairwiseScores {
    pub fn from_confusion(confusion: PairwiseConfusion) -> Self {
        let precision = ratio(confusion.tp, confusion.tp + confusion.fp);
        let recall = ratio(confusion.tp, confusion.tp + confusion.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        PairwiseScores {
            confusion,
            precision,
            recall,
            f1,
        }
    }
}

fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Running label x cluster contingency table with pair counts kept current.
#[derive(Debug, Default)]
struct Contingency<'a> {
    cells: HashMap<(&'a str, usize), u64>,
    by_label: HashMap<&'a str, u64>,
    by_cluster: HashMap<usize, u64>,
    n: u64,
    same_both: u64,
    same_cluster: u64,
    same_label: u64,
}

impl<'a> Contingency<'a> {
    fn add(&mut self, label: &'a str, cluster: usize) {
        let cell = self.cells.entry((label, cluster)).or_default();
        self.same_both += *cell;
        *cell += 1;
        let l = self.by_label.entry(label).or_default();
        self.same_label += *l;
        *l += 1;
        let c = self.by_cluster.entry(cluster).or_default();
        self.same_cluster += *c;
        *c += 1;
        self.n += 1;
    }

    fn confusion(&self) -> PairwiseConfusion {
        let tp = self.same_both;
        let fp = self.same_cluster - tp;
        let fn_ = self.same_label - tp;
        PairwiseConfusion {
            tp,
            fp,
            fn_,
            tn: pairs(self.n) - tp - fp - fn_,
        }
    }
}

fn lookup<'a>(labels: &'a LabelMap, r: &AssignmentRecord) -> Result<&'a str> {
    labels
        .get(&r.item_id)
        .map(String::as_str)
        .ok_or_else(|| Error::MissingLabel(r.item_id.clone()))
}

/// Pairwise precision, recall and F1 from the label x cluster contingency table.
pub fn pairwise_f1(records: &[AssignmentRecord], labels: &LabelMap) -> Result<PairwiseScores> {
    let mut table = Contingency::default();
    for r in records {
        table.add(lookup(labels, r)?, r.cluster_id);
    }
    // recompute from cell totals rather than the running sums
    let tp: u64 = table.cells.values().map(|&c| pairs(c)).sum();
    let cluster_pairs: u64 = table.by_cluster.values().map(|&c| pairs(c)).sum();
    let label_pairs: u64 = table.by_label.values().map(|&c| pairs(c)).sum();
    let confusion = PairwiseConfusion {
        tp,
        fp: cluster_pairs - tp,
        fn_: label_pairs - tp,
        tn: pairs(table.n) + tp - cluster_pairs - label_pairs,
    };
    Ok(PairwiseScores::from_confusion(confusion))
}

/// F1 over growing prefixes of `records`, checked after every `every` records
/// and once more at the end. Each point is `(arrival_index of the last
/// record, f1)`.
pub fn cumulative_f1(
    records: &[AssignmentRecord],
    labels: &LabelMap,
    every: usize,
) -> Result<Vec<(u64, f64)>> {
    if every == 0 {
        return Err(Error::BadConfig("checkpoint interval must be at least 1".into()));
    }
    let mut table = Contingency::default();
    let mut out = Vec::with_capacity(records.len() / every + 1);
    for (i, r) in records.iter().enumerate() {
        table.add(lookup(labels, r)?, r.cluster_id);
        if (i + 1) % every == 0 || i + 1 == records.len() {
            let f1 = PairwiseScores::from_confusion(table.confusion()).f1;
            out.push((r.arrival_index, f1));
        }
    }
    Ok(out)
}

pub fn write_cumulative_csv<W: Write>(series: &[(u64, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["arrival_index", "f1"]).map_err(csv_err)?;
    for (idx, f1) in series {
        w.write_record([idx.to_string(), f1.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteRow {
    pub arrival_index: u64,
    pub cluster_id: usize,
    pub slot: usize,
    pub votes: f64,
    pub medoid_item_id: String,
}

/// Medoid votes of the updated cluster after every step.
#[derive(Debug, Clone, Default)]
pub struct VoteTrace {
    pub rows: Vec<VoteRow>,
}

impl VoteTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Call right after the model processed `record`.
    pub fn observe(&mut self, model: &ModelState, record: &AssignmentRecord) {
        let cluster = &model.clusters()[record.cluster_id];
        self.rows.extend(cluster.medoids.iter().enumerate().map(|(slot, m)| VoteRow {
            arrival_index: record.arrival_index,
            cluster_id: record.cluster_id,
            slot,
            votes: m.votes,
            medoid_item_id: m.item.id.clone(),
        }));
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row).map_err(csv_err)?;
        }
        if self.rows.is_empty() {
            w.write_record(["arrival_index", "cluster_id", "slot", "votes", "medoid_item_id"])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Inputs to the bandwidth estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputInputs {
    pub items_processed: u64,
    pub wall_time_s: f64,
    /// Netflows covered by one sequence; equals `w` for non-overlapping windows.
    pub flows_per_sequence: f64,
    pub packets_per_flow: f64,
    pub bytes_per_packet: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub sequences_per_s: f64,
    pub flows_per_s: f64,
    pub packets_per_s: f64,
    pub bytes_per_s: f64,
    pub bits_per_s: f64,
}

pub fn throughput_report(inp: &ThroughputInputs) -> Result<ThroughputReport> {
    if inp.wall_time_s.is_nan() || inp.wall_time_s <= 0.0 {
        return Err(Error::BadConfig("wall time must be positive".into()));
    }
    let sequences_per_s = inp.items_processed as f64 / inp.wall_time_s;
    let flows_per_s = sequences_per_s * inp.flows_per_sequence;
    let packets_per_s = flows_per_s * inp.packets_per_flow;
    let bytes_per_s = packets_per_s * inp.bytes_per_packet;
    Ok(ThroughputReport {
        sequences_per_s,
        flows_per_s,
        packets_per_s,
        bytes_per_s,
        bits_per_s: bytes_per_s * 8.0,
    })
}

/// Per-run metrics document. Fields that only a clustering run can supply
/// are `None` when scoring saved assignments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n: usize,
    pub k: usize,
    pub p: Option<usize>,
    pub lambda: Option<f64>,
    pub distance_calls: Option<u64>,
    pub wall_time_s: Option<f64>,
    pub seq_per_s: Option<f64>,
    pub est_bandwidth_bps: Option<f64>,
}

impl Metrics {
    /// Quality-only metrics; `k` is the number of distinct clusters used.
    pub fn from_scores(scores: &PairwiseScores, records: &[AssignmentRecord]) -> Self {
        let k = records
            .iter()
            .map(|r| r.cluster_id)
            .collect::<std::collections::HashSet<_>>()
            .len();
        Metrics {
            precision: scores.precision,
            recall: scores.recall,
            f1: scores.f1,
            n: records.len(),
            k,
            p: None,
            lambda: None,
            distance_calls: None,
            wall_time_s: None,
            seq_per_s: None,
            est_bandwidth_bps: None,
        }
    }
}
