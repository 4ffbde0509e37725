//! Seeded generators for synthetic streams and stream orderings.
//!
//! Every generator is a pure function of its configuration and seed. Classes
//! are interleaved in a seeded random order, and item ids are zero-padded so
//! that all ids of a generated stream have the same length.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::item::StreamItem;

fn padded_id(prefix: &str, index: usize) -> String {
    format!("{prefix}-{index:010}")
}

/// `per_class` copies of every class index, in a seeded random order.
fn interleaved_classes(classes: usize, per_class: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut seq: Vec<usize> = (0..classes)
        .flat_map(|c| std::iter::repeat_n(c, per_class))
        .collect();
    seq.shuffle(rng);
    seq
}

/// Two-dimensional Gaussian blobs around centers drawn uniformly in `[-10, 10]^2`.
pub fn gen_blobs(n: usize, k: usize, stds: &[f64], seed: u64) -> Result<Vec<StreamItem>> {
    if k == 0 || !n.is_multiple_of(k) {
        return Err(Error::BadConfig(format!("n={n} must be a positive multiple of k={k}")));
    }
    if stds.len() != k {
        return Err(Error::BadConfig(format!("need {k} standard deviations, got {}", stds.len())));
    }
    if stds.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::BadConfig("standard deviations must be finite and >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<[f64; 2]> = (0..k)
        .map(|_| [rng.random_range(-10.0..=10.0), rng.random_range(-10.0..=10.0)])
        .collect();
    let classes = interleaved_classes(k, n / k, &mut rng);
    classes
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let [cx, cy] = centers[c];
            let zx: f64 = StandardNormal.sample(&mut rng);
            let zy: f64 = StandardNormal.sample(&mut rng);
            StreamItem::point(
                padded_id("blob", i),
                i as u64,
                &[cx + stds[c] * zx, cy + stds[c] * zy],
                Some(format!("blob{c}")),
            )
        })
        .collect()
}

/// Per-class recipe for a sine curve `sin(f t + phase) + noise`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineClassConfig {
    pub frequency_range: (f64, f64),
    pub phase: f64,
    /// Noise amplitude; each step adds a uniform draw from `[-error, error]`.
    pub error: f64,
}

impl SineClassConfig {
    /// The four reference classes.
    pub fn reference_classes() -> Vec<SineClassConfig> {
        [
            ((0.1, 0.12), 5.0, 0.2),
            ((0.2, 0.22), 12.0, 0.4),
            ((0.4, 0.42), -10.0, 0.7),
            ((0.6, 0.62), -20.0, 0.1),
        ]
        .into_iter()
        .map(|(frequency_range, phase, error)| SineClassConfig {
            frequency_range,
            phase,
            error,
        })
        .collect()
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.frequency_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::BadConfig(format!("bad frequency range {lo}..{hi}")));
        }
        if !(self.error.is_finite() && self.error >= 0.0) || !self.phase.is_finite() {
            return Err(Error::BadConfig("sine error must be >= 0 and phase finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftKind {
    #[default]
    None,
    IncrementalPhase,
}

/// What the drift multiplier counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftIndex {
    /// Index of the curve among the curves of its own class.
    #[default]
    Class,
    /// Position of the curve in the whole emitted stream.
    Stream,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DriftConfig {
    pub kind: DriftKind,
    /// Phase added per step of `index`.
    pub drift: f64,
    pub index: DriftIndex,
}

impl DriftConfig {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn incremental(drift: f64) -> Self {
        DriftConfig {
            kind: DriftKind::IncrementalPhase,
            drift,
            index: DriftIndex::Class,
        }
    }

    pub fn with_index(self, index: DriftIndex) -> Self {
        DriftConfig { index, ..self }
    }

    /// Phase offset of a curve at stream position `position` that is the
    /// `class_index`-th curve of its class.
    pub fn phase_offset(&self, position: usize, class_index: usize) -> f64 {
        let c = match self.index {
            DriftIndex::Class => class_index,
            DriftIndex::Stream => position,
        };
        match self.kind {
            DriftKind::None => 0.0,
            DriftKind::IncrementalPhase => self.drift * c as f64,
        }
    }
}

/// Univariate sine curves of length `w`, `n / configs.len()` per class.
///
/// A curve of class `i` is `sin(f * t + phase_i + drift * c) + noise_t` for
/// `t = 0..w`, with `f` drawn uniformly from the class's frequency range and
/// `c` the curve index selected by [`DriftIndex`]. Classes are interleaved,
/// so under drift every class morphs gradually as the stream advances.
pub fn gen_sine(
    n: usize,
    configs: &[SineClassConfig],
    w: usize,
    drift: DriftConfig,
    seed: u64,
) -> Result<Vec<StreamItem>> {
    let classes = configs.len();
    if classes == 0 || !n.is_multiple_of(classes) {
        return Err(Error::BadConfig(format!(
            "n={n} must be a positive multiple of the class count {classes}"
        )));
    }
    if w == 0 {
        return Err(Error::BadConfig("window length must be at least 1".into()));
    }
    if !drift.drift.is_finite() {
        return Err(Error::BadConfig("drift must be finite".into()));
    }
    for c in configs {
        c.validate()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = interleaved_classes(classes, n / classes, &mut rng);
    let mut emitted = vec![0usize; classes];
    order
        .into_iter()
        .enumerate()
        .map(|(pos, class)| {
            let cfg = &configs[class];
            let (lo, hi) = cfg.frequency_range;
            let f = if lo < hi { rng.random_range(lo..hi) } else { lo };
            let phase = cfg.phase + drift.phase_offset(pos, emitted[class]);
            emitted[class] += 1;
            let values = (0..w)
                .map(|t| {
                    let noise = if cfg.error > 0.0 {
                        rng.random_range(-cfg.error..=cfg.error)
                    } else {
                        0.0
                    };
                    (f * t as f64 + phase).sin() + noise
                })
                .collect();
            StreamItem::univariate(
                padded_id("sine", pos),
                pos as u64,
                values,
                Some(format!("sine{class}")),
            )
        })
        .collect()
}

/// Synthetic stand-in for per-host netflow captures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetflowConfig {
    pub n_hosts: usize,
    /// The first `botnet_hosts` hosts follow the botnet profile.
    pub botnet_hosts: usize,
    pub flows_per_host: usize,
    pub w: usize,
    pub step: usize,
    pub seed: u64,
}

impl NetflowConfig {
    /// 16 hosts of which 10 are infected.
    pub fn sixteen_hosts(flows_per_host: usize, w: usize, seed: u64) -> Self {
        NetflowConfig {
            n_hosts: 16,
            botnet_hosts: 10,
            flows_per_host,
            w,
            step: 1,
            seed,
        }
    }

    /// Windows emitted per host.
    pub fn windows_per_host(&self) -> usize {
        (self.flows_per_host - self.w) / self.step + 1
    }
}

/// Average-bytes series of one host.
fn host_series(botnet: bool, flows: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if botnet {
        // steady command-and-control beacons with periodic bursts
        let period = rng.random_range(8..=16);
        let offset = rng.random_range(0..period);
        let base = Normal::<f64>::new(rng.random_range(6.3..6.7), 0.1).expect("valid normal");
        let burst = Normal::<f64>::new(7.3, 0.1).expect("valid normal");
        (0..flows)
            .map(|i| {
                let d = if i % period == offset { burst } else { base };
                d.sample(rng).exp()
            })
            .collect()
    } else {
        let level = rng.random_range(4.0..5.0);
        let d = Normal::<f64>::new(level, 0.5).expect("valid normal");
        (0..flows).map(|_| d.sample(rng).exp()).collect()
    }
}

/// Sliding windows over per-host byte-volume series, labeled `botnet` or
/// `normal`, emitted in order of window start time (host index breaks ties).
pub fn gen_netflow_stream(cfg: &NetflowConfig) -> Result<Vec<StreamItem>> {
    if cfg.w == 0 || cfg.step == 0 || cfg.flows_per_host < cfg.w {
        return Err(Error::BadConfig(format!(
            "need w >= 1, step >= 1 and flows_per_host >= w (w={}, step={}, flows={})",
            cfg.w, cfg.step, cfg.flows_per_host
        )));
    }
    if cfg.botnet_hosts > cfg.n_hosts {
        return Err(Error::BadConfig("more botnet hosts than hosts".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let series: Vec<Vec<f64>> = (0..cfg.n_hosts)
        .map(|h| host_series(h < cfg.botnet_hosts, cfg.flows_per_host, &mut rng))
        .collect();
    let mut out = Vec::with_capacity(cfg.n_hosts * cfg.windows_per_host());
    for win in 0..cfg.windows_per_host() {
        let start = win * cfg.step;
        for (h, s) in series.iter().enumerate() {
            let pos = out.len();
            let label = if h < cfg.botnet_hosts { "botnet" } else { "normal" };
            out.push(StreamItem::univariate(
                padded_id("flow", pos),
                pos as u64,
                s[start..start + cfg.w].to_vec(),
                Some(label.to_string()),
            )?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    #[default]
    Shuffled,
    TimeOrdered,
    ClassOrdered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StreamOrder {
    pub kind: OrderKind,
    pub trial_seed: u64,
}

impl StreamOrder {
    pub fn shuffled(trial_seed: u64) -> Self {
        StreamOrder {
            kind: OrderKind::Shuffled,
            trial_seed,
        }
    }

    pub fn time_ordered() -> Self {
        StreamOrder {
            kind: OrderKind::TimeOrdered,
            trial_seed: 0,
        }
    }

    pub fn class_ordered() -> Self {
        StreamOrder {
            kind: OrderKind::ClassOrdered,
            trial_seed: 0,
        }
    }
}

/// Reorders a stream and rewrites `arrival_index` to the new positions.
/// Class ordering is a stable sort by label with unlabeled items last.
pub fn order_stream(mut items: Vec<StreamItem>, order: StreamOrder) -> Vec<StreamItem> {
    match order.kind {
        OrderKind::Shuffled => {
            let mut rng = ChaCha8Rng::seed_from_u64(order.trial_seed);
            items.shuffle(&mut rng);
        }
        OrderKind::TimeOrdered => items.sort_by_key(|it| it.arrival_index),
        OrderKind::ClassOrdered => {
            items.sort_by(|a, b| match (&a.label, &b.label) {
                (Some(x), Some(y)) => x.cmp(y),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => std::cmp::Ordering::Equal,
            })
        }
    }
    for (i, it) in items.iter_mut().enumerate() {
        it.arrival_index = i as u64;
    }
    items
}
