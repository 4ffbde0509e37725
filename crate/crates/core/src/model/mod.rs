//! The streaming k-medoids engine.
//!
//! A [`ModelState`] holds exactly `k * p` medoids. [`ModelState::init`] seeds
//! them from an initial batch, [`ModelState::assign`] is a read-only probe
//! returning the cluster with the least average distance to the item, and
//! [`ModelState::vote_and_update`] moves votes and promotes the item to a
//! medoid without computing any distance.

mod snapshot;

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distance::DistanceFn;
use crate::error::{Error, Result};
use crate::item::StreamItem;
use crate::par::{self, Execution};

pub use snapshot::{format_real, Snapshot};

/// Default vote decay rate.
pub const DEFAULT_LAMBDA: f64 = 0.1;
/// Default initial batch size, as a multiple of `k * p`.
pub const DEFAULT_BATCH_FACTOR: f64 = 1.5;

/// How the initial medoids are picked from the batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Primary medoids sampled proportionally to squared distance from the
    /// first one, secondaries taken as the nearest batch items.
    #[default]
    Sampled,
    /// All `k * p` medoids drawn uniformly.
    Random,
}

/// User-facing parameters of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub k: usize,
    pub p: usize,
    pub lambda: f64,
    pub distance: DistanceFn,
    pub init_mode: InitMode,
    pub seed: u64,
}

impl ModelParams {
    pub fn new(k: usize, p: usize) -> Self {
        ModelParams {
            k,
            p,
            lambda: DEFAULT_LAMBDA,
            distance: DistanceFn::EUCLIDEAN,
            init_mode: InitMode::Sampled,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.p == 0 {
            return Err(Error::BadConfig(format!(
                "k and p must be at least 1 (k={}, p={})",
                self.k, self.p
            )));
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(Error::BadConfig(format!(
                "lambda must lie in [0, 1), got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Initial batch size `ceil(factor * k * p)`, never below `k * p`.
pub fn batch_size(k: usize, p: usize, factor: f64) -> usize {
    let kp = k * p;
    ((factor * kp as f64).ceil() as usize).max(kp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Medoid {
    pub item: StreamItem,
    pub votes: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    pub cluster_id: usize,
    pub medoids: Vec<Medoid>,
    /// Slot of the most recently promoted medoid; it cannot be replaced on
    /// the cluster's next update (unless `p == 1`).
    pub newest_index: usize,
}

impl ClusterState {
    pub fn votes(&self) -> Vec<f64> {
        self.medoids.iter().map(|m| m.votes).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// Distance evaluations made by init and by streamed assignments.
    pub distance_calls: u64,
    /// Items that went through a full assign + update step.
    pub items_processed: u64,
    /// Distance evaluations spent labeling the initial batch; kept apart so
    /// that `distance_calls` follows `k*b + m*k*p` exactly.
    pub labeling_distance_calls: u64,
}

/// The engine's per-item output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub item_id: String,
    pub arrival_index: u64,
    pub cluster_id: usize,
}

/// Result of the read-only assignment probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assignment {
    pub cluster_id: usize,
    pub closest_medoid: usize,
}

#[derive(Debug, Clone)]
pub struct ModelState {
    clusters: Vec<ClusterState>,
    k: usize,
    p: usize,
    lambda: f64,
    distance: DistanceFn,
    seed: u64,
    counters: Counters,
    exec: Execution,
}

impl ModelState {
    /// Seeds the model from an initial batch.
    pub fn init(batch: &[StreamItem], params: &ModelParams) -> Result<Self> {
        Self::init_with(batch, params, Execution::Sequential)
    }

    /// Like [`ModelState::init`], evaluating the batch distance rows with `exec`.
    pub fn init_with(batch: &[StreamItem], params: &ModelParams, exec: Execution) -> Result<Self> {
        params.validate()?;
        let ModelParams { k, p, .. } = *params;
        let need = k * p;
        if batch.len() < need {
            return Err(Error::InsufficientBatch {
                got: batch.len(),
                need,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut calls = 0u64;
        let slots: Vec<Vec<usize>> = match params.init_mode {
            InitMode::Random => rand::seq::index::sample(&mut rng, batch.len(), need)
                .into_vec()
                .chunks(p)
                .map(<[usize]>::to_vec)
                .collect(),
            InitMode::Sampled => {
                let (slots, c) = sampled_init(batch, params, exec, &mut rng)?;
                calls = c;
                slots
            }
        };

        let clusters = slots
            .into_iter()
            .enumerate()
            .map(|(cluster_id, idx)| ClusterState {
                cluster_id,
                medoids: idx
                    .into_iter()
                    .map(|i| Medoid {
                        item: batch[i].clone(),
                        votes: 0.0,
                    })
                    .collect(),
                newest_index: p - 1,
            })
            .collect();

        Ok(ModelState {
            clusters,
            k,
            p,
            lambda: params.lambda,
            distance: params.distance,
            seed: params.seed,
            counters: Counters {
                distance_calls: calls,
                ..Counters::default()
            },
            exec: Execution::Sequential,
        })
    }

    /// Sets how the `k * p` distances of one assignment are evaluated.
    /// Results do not depend on this choice.
    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn distance(&self) -> DistanceFn {
        self.distance
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn clusters(&self) -> &[ClusterState] {
        &self.clusters
    }

    pub fn medoid_count(&self) -> usize {
        self.clusters.iter().map(|c| c.medoids.len()).sum()
    }

    /// Distances from `s` to every medoid, cluster-major.
    fn medoid_distances(&self, s: &StreamItem) -> Result<Vec<f64>> {
        let p = self.p;
        let dist = self.distance;
        par::try_map_range(self.exec, self.k * p, |i| {
            dist.eval(s, &self.clusters[i / p].medoids[i % p].item)
        })
    }

    fn argmin_cluster(&self, dists: &[f64]) -> Assignment {
        let p = self.p;
        let mut best = (0, f64::INFINITY);
        for (cid, row) in dists.chunks(p).enumerate() {
            let avg = row.iter().sum::<f64>() / p as f64;
            if avg < best.1 {
                best = (cid, avg);
            }
        }
        let cluster_id = best.0;
        let closest_medoid = argmin(&dists[cluster_id * p..(cluster_id + 1) * p]);
        Assignment {
            cluster_id,
            closest_medoid,
        }
    }

    /// Picks the cluster with the least average distance to `s` and that
    /// cluster's closest medoid. Ties go to the lowest index. Adds exactly
    /// `k * p` to the distance counter and leaves votes untouched.
    pub fn assign(&mut self, s: &StreamItem) -> Result<Assignment> {
        let dists = self.medoid_distances(s)?;
        self.counters.distance_calls += dists.len() as u64;
        Ok(self.argmin_cluster(&dists))
    }

    /// Votes for the closest medoid, decays its siblings and promotes `s`
    /// into the least-voted slot other than the newest one. Returns the slot
    /// that `s` now occupies.
    ///
    /// # Panics
    /// If `cluster_id` or `closest_medoid` is out of range.
    pub fn vote_and_update(&mut self, s: StreamItem, cluster_id: usize, closest_medoid: usize) -> usize {
        let keep = 1.0 - self.lambda;
        let cluster = &mut self.clusters[cluster_id];
        assert!(closest_medoid < cluster.medoids.len(), "medoid slot out of range");
        for (j, m) in cluster.medoids.iter_mut().enumerate() {
            if j == closest_medoid {
                m.votes += 1.0;
            } else {
                m.votes *= keep;
            }
        }

        let slot = if cluster.medoids.len() == 1 {
            0
        } else {
            let mut best: Option<(usize, f64)> = None;
            for (j, m) in cluster.medoids.iter().enumerate() {
                if j == cluster.newest_index {
                    continue;
                }
                if best.is_none_or(|(_, v)| m.votes < v) {
                    best = Some((j, m.votes));
                }
            }
            best.map(|(j, _)| j).unwrap_or(0)
        };
        cluster.medoids[slot] = Medoid { item: s, votes: 0.0 };
        cluster.newest_index = slot;
        slot
    }

    /// One full stream step: assign, then vote and update.
    pub fn step(&mut self, s: StreamItem) -> Result<AssignmentRecord> {
        let a = self.assign(&s)?;
        let record = AssignmentRecord {
            item_id: s.id.clone(),
            arrival_index: s.arrival_index,
            cluster_id: a.cluster_id,
        };
        self.vote_and_update(s, a.cluster_id, a.closest_medoid);
        self.counters.items_processed += 1;
        Ok(record)
    }

    /// Lazily processes a stream in a single pass, yielding one record per item.
    pub fn process_stream<I>(&mut self, stream: I) -> ProcessStream<'_, I::IntoIter>
    where
        I: IntoIterator<Item = StreamItem>,
    {
        ProcessStream {
            model: self,
            stream: stream.into_iter(),
        }
    }

    /// Labels the initial batch without voting or replacement. Items that are
    /// currently medoids go to their own cluster; the rest are assigned with
    /// the read-only probe, counted under `labeling_distance_calls`.
    pub fn assign_batch_items(&mut self, batch: &[StreamItem]) -> Result<Vec<AssignmentRecord>> {
        let owner: HashMap<&str, usize> = self
            .clusters
            .iter()
            .flat_map(|c| c.medoids.iter().map(move |m| (m.item.id.as_str(), c.cluster_id)))
            .collect();
        let mut out = Vec::with_capacity(batch.len());
        let mut calls = 0u64;
        for item in batch {
            let cluster_id = match owner.get(item.id.as_str()) {
                Some(&cid) => cid,
                None => {
                    let dists = self.medoid_distances(item)?;
                    calls += dists.len() as u64;
                    self.argmin_cluster(&dists).cluster_id
                }
            };
            out.push(AssignmentRecord {
                item_id: item.id.clone(),
                arrival_index: item.arrival_index,
                cluster_id,
            });
        }
        self.counters.labeling_distance_calls += calls;
        Ok(out)
    }

    pub(crate) fn from_parts(
        clusters: Vec<ClusterState>,
        lambda: f64,
        distance: DistanceFn,
        seed: u64,
        counters: Counters,
    ) -> Result<Self> {
        let k = clusters.len();
        let p = clusters.first().map_or(0, |c| c.medoids.len());
        ModelParams {
            k,
            p,
            lambda,
            distance,
            init_mode: InitMode::Sampled,
            seed,
        }
        .validate()?;
        for (i, c) in clusters.iter().enumerate() {
            if c.cluster_id != i || c.medoids.len() != p || c.newest_index >= p {
                return Err(Error::BadConfig(format!("malformed cluster {i} in snapshot")));
            }
            if c.medoids.iter().any(|m| m.votes.is_nan() || m.votes < 0.0) {
                return Err(Error::BadConfig(format!("negative votes in cluster {i}")));
            }
        }
        Ok(ModelState {
            clusters,
            k,
            p,
            lambda,
            distance,
            seed,
            counters,
            exec: Execution::Sequential,
        })
    }
}

/// Index of the smallest value; ties resolve to the lowest index.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Returns the batch indices of each cluster's medoids (primary first) and
/// the number of distances evaluated, which is always `k * |batch|`.
fn sampled_init(
    batch: &[StreamItem],
    params: &ModelParams,
    exec: Execution,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Vec<usize>>, u64)> {
    let ModelParams { k, p, distance, .. } = *params;
    let n = batch.len();
    let row = |center: usize| par::try_map_range(exec, n, |j| distance.eval(&batch[center], &batch[j]));

    let first = rng.random_range(0..n);
    let first_row = row(first)?;
    let mut taken = vec![false; n];
    taken[first] = true;
    let mut primaries = vec![first];
    for _ in 1..k {
        let weights: Vec<f64> = (0..n)
            .map(|j| if taken[j] { 0.0 } else { first_row[j] * first_row[j] })
            .collect();
        let pick = match WeightedIndex::new(&weights) {
            Ok(w) => w.sample(rng),
            // every remaining item coincides with the first medoid
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|&j| !taken[j]).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        taken[pick] = true;
        primaries.push(pick);
    }

    let mut rows = vec![first_row];
    for &c in &primaries[1..] {
        rows.push(row(c)?);
    }
    let calls = (k * n) as u64;

    let mut slots = Vec::with_capacity(k);
    for (i, &primary) in primaries.iter().enumerate() {
        let mut free: Vec<usize> = (0..n).filter(|&j| !taken[j]).collect();
        free.sort_by(|&a, &b| rows[i][a].total_cmp(&rows[i][b]).then(a.cmp(&b)));
        let mut cluster = vec![primary];
        for &j in free.iter().take(p - 1) {
            taken[j] = true;
            cluster.push(j);
        }
        slots.push(cluster);
    }
    Ok((slots, calls))
}

/// Iterator returned by [`ModelState::process_stream`].
pub struct ProcessStream<'m, I> {
    model: &'m mut ModelState,
    stream: I,
}

impl<I: Iterator<Item = StreamItem>> Iterator for ProcessStream<'_, I> {
    type Item = Result<AssignmentRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        self.stream.next().map(|s| self.model.step(s))
    }
}
