//! Trial runner: order a stream, initialize on its head, label the batch and
//! process the rest. Shared by the CLI, the benches and the acceptance suite.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{self, LabelMap, PairwiseScores, VoteTrace};
use crate::item::StreamItem;
use crate::model::{batch_size, AssignmentRecord, Counters, ModelParams, ModelState, DEFAULT_BATCH_FACTOR};
use crate::oracle;
use crate::par::{self, Execution};
use crate::streamgen::{order_stream, OrderKind, StreamOrder};
use crate::DistanceFn;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterConfig {
    pub params: ModelParams,
    pub batch_factor: f64,
}

impl ClusterConfig {
    pub fn new(params: ModelParams) -> Self {
        ClusterConfig {
            params,
            batch_factor: DEFAULT_BATCH_FACTOR,
        }
    }

    pub fn batch_size(&self) -> usize {
        batch_size(self.params.k, self.params.p, self.batch_factor)
    }

    /// Distance calls a sampled-init run over `n` items must report.
    pub fn expected_distance_calls(&self, n: usize) -> u64 {
        let (k, p) = (self.params.k as u64, self.params.p as u64);
        let b = self.batch_size() as u64;
        k * b + (n as u64 - b) * k * p
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// One record per input item: the batch first, then the streamed items.
    pub records: Vec<AssignmentRecord>,
    pub model: ModelState,
    pub wall_time_s: f64,
    pub trace: Option<VoteTrace>,
}

impl RunOutput {
    pub fn counters(&self) -> Counters {
        self.model.counters()
    }
}

/// Runs the engine over `items` in the given order.
pub fn run_stream(items: &[StreamItem], cfg: &ClusterConfig, trace_votes: bool) -> Result<RunOutput> {
    let b = cfg.batch_size();
    if items.len() < b {
        return Err(Error::InsufficientBatch {
            got: items.len(),
            need: b,
        });
    }
    let start = Instant::now();
    let (batch, rest) = items.split_at(b);
    let mut model = ModelState::init(batch, &cfg.params)?;
    let mut records = model.assign_batch_items(batch)?;
    records.reserve(rest.len());
    let mut trace = trace_votes.then(VoteTrace::new);
    for s in rest {
        let rec = model.step(s.clone())?;
        if let Some(t) = trace.as_mut() {
            t.observe(&model, &rec);
        }
        records.push(rec);
    }
    Ok(RunOutput {
        records,
        model,
        wall_time_s: start.elapsed().as_secs_f64(),
        trace,
    })
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub run: RunOutput,
    pub scores: Option<PairwiseScores>,
}

/// Seed of trial `t`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_add(trial as u64)
}

/// Runs `trials` independent trials. Trial `t` reorders the stream and seeds
/// initialization with `seed + t`; trials may run concurrently under `exec`,
/// each engine staying sequential. Scores are computed when every item is labeled.
pub fn run_trials(
    items: &[StreamItem],
    cfg: &ClusterConfig,
    trials: usize,
    order: OrderKind,
    trace_votes: bool,
    exec: Execution,
) -> Result<Vec<TrialOutcome>> {
    if trials == 0 {
        return Err(Error::BadConfig("trials must be at least 1".into()));
    }
    let labels = eval::label_map(items);
    let all_labeled = labels.len() == items.len();
    par::try_map_range(exec, trials, |t| {
        let seed = trial_seed(cfg.params.seed, t);
        let ordered = order_stream(
            items.to_vec(),
            StreamOrder {
                kind: order,
                trial_seed: seed,
            },
        );
        let trial_cfg = ClusterConfig {
            params: ModelParams { seed, ..cfg.params },
            ..*cfg
        };
        let run = run_stream(&ordered, &trial_cfg, trace_votes)?;
        let scores = if all_labeled {
            Some(eval::pairwise_f1(&run.records, &labels)?)
        } else {
            None
        };
        Ok(TrialOutcome {
            trial: t,
            seed,
            run,
            scores,
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trials: usize,
    pub f1_mean: f64,
    pub f1_std: f64,
    pub precision_mean: f64,
    pub recall_mean: f64,
    pub runtime_mean_s: f64,
    pub distance_calls_mean: f64,
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn summarize(outcomes: &[TrialOutcome]) -> TrialSummary {
    let f1: Vec<f64> = outcomes.iter().filter_map(|o| o.scores.map(|s| s.f1)).collect();
    let prec: Vec<f64> = outcomes.iter().filter_map(|o| o.scores.map(|s| s.precision)).collect();
    let rec: Vec<f64> = outcomes.iter().filter_map(|o| o.scores.map(|s| s.recall)).collect();
    let rt: Vec<f64> = outcomes.iter().map(|o| o.run.wall_time_s).collect();
    let dc: Vec<f64> = outcomes
        .iter()
        .map(|o| o.run.counters().distance_calls as f64)
        .collect();
    let (f1_mean, f1_std) = mean_std(&f1);
    TrialSummary {
        trials: outcomes.len(),
        f1_mean,
        f1_std,
        precision_mean: mean_std(&prec).0,
        recall_mean: mean_std(&rec).0,
        runtime_mean_s: mean_std(&rt).0,
        distance_calls_mean: mean_std(&dc).0,
    }
}

/// F1 of exact PAM fit on `fit` and scored on the same items.
pub fn pam_f1(
    fit: &[StreamItem],
    k: usize,
    distance: DistanceFn,
    labels: &LabelMap,
    exec: Execution,
) -> Result<f64> {
    let pam = oracle::pam_exact(fit, k, distance, usize::MAX, exec)?;
    Ok(eval::pairwise_f1(&pam.assignments, labels)?.f1)
}

/// F1 of exact PAM medoids fit on the first `fit_n` items and then frozen:
/// every item of the stream goes to its nearest frozen medoid.
pub fn frozen_pam_f1(
    items: &[StreamItem],
    fit_n: usize,
    k: usize,
    distance: DistanceFn,
    labels: &LabelMap,
    exec: Execution,
) -> Result<f64> {
    let fit = &items[..fit_n.min(items.len())];
    let pam = oracle::pam_exact(fit, k, distance, usize::MAX, exec)?;
    let medoids: Vec<StreamItem> = pam.medoid_indices.iter().map(|&i| fit[i].clone()).collect();
    let records = oracle::assign_to_medoids(items, &medoids, distance, exec)?;
    Ok(eval::pairwise_f1(&records, labels)?.f1)
}
