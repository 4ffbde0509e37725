//! Self-contained JSON images of a model.
//!
//! Every real is written with 17 significant digits in a fixed-width
//! scientific form (` 1.2345678901234567e+002`, positive values padded with a
//! leading space) and every counter is right-aligned in 20 columns, so the
//! byte size of a snapshot depends only on `k`, `p`, the item shapes and the
//! id lengths, never on how many items were processed.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ClusterState, Counters, Medoid, ModelState};
use crate::distance::DistanceFn;
use crate::error::{Error, Result};
use crate::item::StreamItem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMedoid {
    pub id: String,
    pub votes: f64,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotCluster {
    pub cluster_id: usize,
    pub newest_index: usize,
    pub medoids: Vec<SnapshotMedoid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub k: usize,
    pub p: usize,
    pub lambda: f64,
    pub distance: String,
    pub seed: u64,
    pub counters: Counters,
    pub clusters: Vec<SnapshotCluster>,
}

/// Renders `x` with 17 significant digits in exactly 24 bytes.
pub fn format_real(x: f64) -> String {
    let sci = format!("{:.16e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let sign = if x.is_sign_negative() && x != 0.0 { '-' } else { ' ' };
    let esign = if exp < 0 { '-' } else { '+' };
    format!("{sign}{mantissa}e{esign}{:03}", exp.abs())
}

fn push_counter(out: &mut String, name: &str, v: u64) {
    let _ = write!(out, "\"{name}\":{v:>20}");
}

impl Snapshot {
    /// Single-line JSON with a fixed field order.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "{{\"k\":{},\"p\":{},\"lambda\":{},\"distance\":{},\"seed\":{},\"counters\":{{",
            self.k,
            self.p,
            format_real(self.lambda),
            serde_json::to_string(&self.distance).expect("string"),
            self.seed
        );
        push_counter(&mut out, "distance_calls", self.counters.distance_calls);
        out.push(',');
        push_counter(&mut out, "items_processed", self.counters.items_processed);
        out.push(',');
        push_counter(
            &mut out,
            "labeling_distance_calls",
            self.counters.labeling_distance_calls,
        );
        out.push_str("},\"clusters\":[");
        for (ci, c) in self.clusters.iter().enumerate() {
            if ci > 0 {
                out.push(',');
            }
            let _ = write!(
                out,
                "{{\"cluster_id\":{},\"newest_index\":{},\"medoids\":[",
                c.cluster_id, c.newest_index
            );
            for (mi, m) in c.medoids.iter().enumerate() {
                if mi > 0 {
                    out.push(',');
                }
                let _ = write!(
                    out,
                    "{{\"id\":{},\"votes\":{},\"values\":[",
                    serde_json::to_string(&m.id).expect("string"),
                    format_real(m.votes)
                );
                for (ri, row) in m.values.iter().enumerate() {
                    if ri > 0 {
                        out.push(',');
                    }
                    out.push('[');
                    for (vi, v) in row.iter().enumerate() {
                        if vi > 0 {
                            out.push(',');
                        }
                        out.push_str(&format_real(*v));
                    }
                    out.push(']');
                }
                out.push_str("]}");
            }
            out.push_str("]}");
        }
        out.push_str("]}");
        out
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl ModelState {
    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            k: self.k,
            p: self.p,
            lambda: self.lambda,
            distance: self.distance.to_string(),
            seed: self.seed,
            counters: self.counters,
            clusters: self
                .clusters
                .iter()
                .map(|c| SnapshotCluster {
                    cluster_id: c.cluster_id,
                    newest_index: c.newest_index,
                    medoids: c
                        .medoids
                        .iter()
                        .map(|m| SnapshotMedoid {
                            id: m.item.id.clone(),
                            votes: m.votes,
                            values: m.item.rows(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Rebuilds a model from a snapshot. Restored medoids carry no label and
    /// arrival index 0, since the image does not store them.
    pub fn restore(snap: &Snapshot) -> Result<Self> {
        let distance: DistanceFn = snap.distance.parse()?;
        let clusters = snap
            .clusters
            .iter()
            .map(|c| {
                let medoids = c
                    .medoids
                    .iter()
                    .map(|m| {
                        Ok(Medoid {
                            item: StreamItem::from_rows(m.id.clone(), 0, &m.values, None)?,
                            votes: m.votes,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ClusterState {
                    cluster_id: c.cluster_id,
                    medoids,
                    newest_index: c.newest_index,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if clusters.len() != snap.k || clusters.iter().any(|c| c.medoids.len() != snap.p) {
            return Err(Error::BadConfig(
                "snapshot k/p disagree with its clusters".into(),
            ));
        }
        ModelState::from_parts(clusters, snap.lambda, distance, snap.seed, snap.counters)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_format_is_fixed_width_and_exact() {
        for x in [0.0, -0.0, 1.0, -1.0, 0.1, 1e-300, -2.5e300, 123.456, f64::MIN_POSITIVE] {
            let s = format_real(x);
            assert_eq!(s.len(), 24, "{s}");
            let back: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(back, x, "{s}");
        }
        assert_eq!(format_real(0.1), " 1.0000000000000001e-001");
        assert_eq!(format_real(-250.0), "-2.5000000000000000e+002");
    }
}
