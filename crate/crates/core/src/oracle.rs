//! Slow reference implementations used by tests, benches and `bench --with-oracle`.
//!
//! None of these share code paths with the routines they check: exact PAM
//! works from a full distance matrix, brute-force DTW enumerates warping
//! paths explicitly, and brute-force F1 visits every pair.

use crate::distance::{local_cost, DistanceFn};
use crate::error::{Error, Result};
use crate::eval::{LabelMap, PairwiseConfusion, PairwiseScores};
use crate::item::StreamItem;
use crate::model::AssignmentRecord;
use crate::par::{self, Execution};

/// Longest sequence accepted by [`dtw_bruteforce`].
pub const BRUTE_FORCE_DTW_MAX_LEN: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct PamResult {
    /// Indices into the input slice, in medoid (cluster id) order.
    pub medoid_indices: Vec<usize>,
    pub medoid_ids: Vec<String>,
    pub assignments: Vec<AssignmentRecord>,
    pub total_cost: f64,
    /// Cost after BUILD followed by the cost after each applied swap.
    pub cost_history: Vec<f64>,
    pub swaps: usize,
    /// Distinct pairwise distances evaluated.
    pub distance_calls: u64,
}

/// Symmetric `n x n` distance matrix, row-major.
pub fn distance_matrix(items: &[StreamItem], distance: DistanceFn, exec: Execution) -> Result<Vec<f64>> {
    let n = items.len();
    let upper: Vec<Vec<f64>> = par::try_map_range(exec, n, |i| {
        (i + 1..n).map(|j| distance.eval(&items[i], &items[j])).collect()
    })?;
    let mut m = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &d) in row.iter().enumerate() {
            let j = i + 1 + off;
            m[i * n + j] = d;
            m[j * n + i] = d;
        }
    }
    Ok(m)
}

/// Nearest and second-nearest medoid distance for every point.
fn nearest_two(dm: &[f64], n: usize, medoids: &[usize]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let mut owner = vec![0; n];
    let mut near = vec![f64::INFINITY; n];
    let mut second = vec![f64::INFINITY; n];
    for j in 0..n {
        for (pos, &m) in medoids.iter().enumerate() {
            let d = dm[m * n + j];
            if d < near[j] {
                second[j] = near[j];
                near[j] = d;
                owner[j] = pos;
            } else if d < second[j] {
                second[j] = d;
            }
        }
    }
    (owner, near, second)
}

/// Exact PAM: greedy BUILD, then best-improvement SWAP until no single swap
/// lowers the total cost or `max_iter` swaps have been applied. Ties resolve
/// to the lowest index throughout.
pub fn pam_exact(
    items: &[StreamItem],
    k: usize,
    distance: DistanceFn,
    max_iter: usize,
    exec: Execution,
) -> Result<PamResult> {
    let n = items.len();
    if k == 0 || n < k {
        return Err(Error::TooFewItems {
            got: n,
            need: k.max(1),
        });
    }
    let dm = distance_matrix(items, distance, exec)?;

    // BUILD
    let mut medoids = Vec::with_capacity(k);
    let first = (0..n)
        .map(|i| (i, dm[i * n..(i + 1) * n].iter().sum::<f64>()))
        .fold((0, f64::INFINITY), |best, (i, c)| if c < best.1 { (i, c) } else { best })
        .0;
    medoids.push(first);
    let mut near: Vec<f64> = dm[first * n..(first + 1) * n].to_vec();
    while medoids.len() < k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for i in (0..n).filter(|i| !medoids.contains(i)) {
            let gain: f64 = (0..n).map(|j| (near[j] - dm[i * n + j]).max(0.0)).sum();
            if gain > best.1 {
                best = (i, gain);
            }
        }
        let pick = best.0;
        medoids.push(pick);
        for j in 0..n {
            near[j] = near[j].min(dm[pick * n + j]);
        }
    }

    // SWAP
    let mut cost: f64 = near.iter().sum();
    let mut history = vec![cost];
    let mut swaps = 0;
    while swaps < max_iter {
        let (owner, near, second) = nearest_two(&dm, n, &medoids);
        let candidates: Vec<usize> = (0..n).filter(|o| !medoids.contains(o)).collect();
        let deltas: Vec<(f64, usize, usize)> = par::map_slice(exec, &candidates, |&o| {
            let mut best = (f64::INFINITY, usize::MAX, o);
            for pos in 0..k {
                let mut delta = 0.0;
                for j in 0..n {
                    let d_o = dm[o * n + j];
                    let new = if owner[j] == pos {
                        second[j].min(d_o)
                    } else {
                        near[j].min(d_o)
                    };
                    delta += new - near[j];
                }
                if delta < best.0 {
                    best = (delta, pos, o);
                }
            }
            best
        });
        let best = deltas
            .into_iter()
            .fold((f64::INFINITY, usize::MAX, usize::MAX), |a, b| if b.0 < a.0 { b } else { a });
        if best.0 >= -1e-12 * (1.0 + cost.abs()) {
            break;
        }
        medoids[best.1] = best.2;
        cost = nearest_two(&dm, n, &medoids).1.iter().sum();
        history.push(cost);
        swaps += 1;
    }

    let (owner, near, _) = nearest_two(&dm, n, &medoids);
    let assignments = items
        .iter()
        .zip(&owner)
        .map(|(it, &c)| AssignmentRecord {
            item_id: it.id.clone(),
            arrival_index: it.arrival_index,
            cluster_id: c,
        })
        .collect();
    Ok(PamResult {
        medoid_ids: medoids.iter().map(|&m| items[m].id.clone()).collect(),
        medoid_indices: medoids,
        assignments,
        total_cost: near.iter().sum(),
        cost_history: history,
        swaps,
        distance_calls: (n * n.saturating_sub(1) / 2) as u64,
    })
}

/// Assigns every item to its nearest fixed medoid (ties to the lowest
/// position). Used to apply frozen offline medoids to the rest of a stream.
pub fn assign_to_medoids(
    items: &[StreamItem],
    medoids: &[StreamItem],
    distance: DistanceFn,
    exec: Execution,
) -> Result<Vec<AssignmentRecord>> {
    if medoids.is_empty() {
        return Err(Error::TooFewItems { got: 0, need: 1 });
    }
    par::try_map_range(exec, items.len(), |i| {
        let it = &items[i];
        let mut best = (0, f64::INFINITY);
        for (pos, m) in medoids.iter().enumerate() {
            let d = distance.eval(it, m)?;
            if d < best.1 {
                best = (pos, d);
            }
        }
        Ok(AssignmentRecord {
            item_id: it.id.clone(),
            arrival_index: it.arrival_index,
            cluster_id: best.0,
        })
    })
}

/// Minimum cost over every monotone, contiguous warping path from the first
/// pair of points to the last, enumerated one path at a time.
pub fn dtw_bruteforce(a: &StreamItem, b: &StreamItem) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::ShapeMismatch(format!(
            "dimensionality {} vs {}",
            a.dims(),
            b.dims()
        )));
    }
    for len in [a.len(), b.len()] {
        if len > BRUTE_FORCE_DTW_MAX_LEN {
            return Err(Error::TooLong {
                len,
                max: BRUTE_FORCE_DTW_MAX_LEN,
            });
        }
    }
    let mut path = Vec::new();
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, &mut path, &mut best);
    Ok(best)
}

fn walk(a: &StreamItem, b: &StreamItem, i: usize, j: usize, path: &mut Vec<(usize, usize)>, best: &mut f64) {
    path.push((i, j));
    if i + 1 == a.len() && j + 1 == b.len() {
        let cost: f64 = path.iter().map(|&(x, y)| local_cost(a.step(x), b.step(y))).sum();
        if cost < *best {
            *best = cost;
        }
    } else {
        for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
            if i + di < a.len() && j + dj < b.len() {
                walk(a, b, i + di, j + dj, path, best);
            }
        }
    }
    path.pop();
}

/// Pairwise scores by visiting all `n * (n - 1) / 2` pairs.
pub fn f1_bruteforce(records: &[AssignmentRecord], labels: &LabelMap) -> Result<PairwiseScores> {
    let labeled: Vec<(&str, usize)> = records
        .iter()
        .map(|r| {
            labels
                .get(&r.item_id)
                .map(|l| (l.as_str(), r.cluster_id))
                .ok_or_else(|| Error::MissingLabel(r.item_id.clone()))
        })
        .collect::<Result<_>>()?;
    let mut c = PairwiseConfusion::default();
    for (x, &(la, ca)) in labeled.iter().enumerate() {
        for &(lb, cb) in &labeled[x + 1..] {
            match (la == lb, ca == cb) {
                (true, true) => c.tp += 1,
                (true, false) => c.fn_ += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
            }
        }
    }
    Ok(PairwiseScores::from_confusion(c))
}
