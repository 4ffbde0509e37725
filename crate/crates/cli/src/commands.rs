use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use secleds::eval::{self, label_map, throughput_report, Metrics, ThroughputInputs, ThroughputReport};
use secleds::experiment::{pam_f1, run_trials, summarize, ClusterConfig, TrialSummary};
use secleds::io::{read_assignments, read_items_file, write_assignments, write_items};
use secleds::model::ModelParams;
use secleds::sampler::{run_sampling, SamplingSummary, SnapshotPolicy};
use secleds::streamgen::{
    gen_blobs, gen_netflow_stream, gen_sine, order_stream, DriftConfig, NetflowConfig, SineClassConfig,
    StreamOrder,
};
use secleds::{Error, Execution, ModelState, StreamItem};
use serde::Serialize;

use crate::{BenchArgs, BenchData, ClusterArgs, Dataset, EvaluateArgs, Failure, SampleArgs, SineArgs, TrafficArgs};

type CmdResult = Result<(), Failure>;

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<(), Error>) -> CmdResult {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w)?;
            w.flush().map_err(Error::from)?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)?;
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(value: &T, w: &mut dyn Write) -> Result<(), Error> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

fn load(path: &Path) -> Result<Vec<StreamItem>, Failure> {
    read_items_file(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn sine_configs(classes: usize) -> Result<Vec<SineClassConfig>, Failure> {
    let all = SineClassConfig::reference_classes();
    if classes == 0 || classes > all.len() {
        return Err(Failure::config(format!("--classes must be between 1 and {}", all.len())));
    }
    Ok(all[..classes].to_vec())
}

fn sine(a: &SineArgs, default_drift: f64) -> Result<Vec<StreamItem>, Failure> {
    let drift = a.drift.unwrap_or(default_drift);
    let cfg = if drift == 0.0 {
        DriftConfig::none()
    } else {
        DriftConfig::incremental(drift).with_index(a.drift_index.into())
    };
    Ok(gen_sine(a.n, &sine_configs(a.classes)?, a.w, cfg, a.seed)?)
}

fn blob_stds(stds: &[f64], k: usize) -> Result<Vec<f64>, Failure> {
    match stds.len() {
        1 => Ok(vec![stds[0]; k]),
        n if n == k => Ok(stds.to_vec()),
        n => Err(Failure::config(format!("--stds needs 1 or {k} values, got {n}"))),
    }
}

pub fn generate(dataset: Dataset) -> CmdResult {
    let (items, out) = match dataset {
        Dataset::Blobs { n, k, stds, seed, out } => (gen_blobs(n, k, &blob_stds(&stds, k)?, seed)?, out),
        Dataset::Sine(a) => (sine(&a, 0.0)?, a.out),
        Dataset::SineDrifted(a) => (sine(&a, 0.05)?, a.out),
        Dataset::Netflow {
            hosts,
            botnet_hosts,
            flows_per_host,
            w,
            step,
            seed,
            out,
        } => {
            let cfg = NetflowConfig {
                n_hosts: hosts,
                botnet_hosts,
                flows_per_host,
                w,
                step,
                seed,
            };
            (gen_netflow_stream(&cfg)?, out)
        }
    };
    with_output(out.as_deref(), |w| write_items(&items, w))
}

fn bandwidth(t: &TrafficArgs, items: u64, wall_time_s: f64, w: usize) -> Option<ThroughputReport> {
    throughput_report(&ThroughputInputs {
        items_processed: items,
        wall_time_s,
        flows_per_sequence: t.flows_per_sequence.unwrap_or(w as f64),
        packets_per_flow: t.packets_per_flow,
        bytes_per_packet: t.bytes_per_packet,
    })
    .ok()
}

#[derive(Serialize)]
struct TrialMetrics {
    trial: usize,
    seed: u64,
    labeling_distance_calls: u64,
    #[serde(flatten)]
    metrics: Metrics,
}

#[derive(Serialize)]
struct ClusterReport {
    input: String,
    distance: String,
    batch_size: usize,
    order: String,
    expected_distance_calls: u64,
    summary: TrialSummary,
    trials: Vec<TrialMetrics>,
}

pub fn cluster(a: ClusterArgs, exec: Execution) -> CmdResult {
    let params = a.model.params()?;
    if a.trials == 0 {
        return Err(Failure::config("--trials must be at least 1"));
    }
    if a.cumulative_every == Some(0) {
        return Err(Failure::config("--cumulative-every must be at least 1"));
    }
    let items = load(&a.input)?;
    let cfg = ClusterConfig {
        params,
        batch_factor: a.model.batch_factor,
    };
    if items.len() < cfg.batch_size() {
        return Err(Error::InsufficientBatch {
            got: items.len(),
            need: cfg.batch_size(),
        }
        .into());
    }
    let labels = label_map(&items);
    let labeled = !items.is_empty() && labels.len() == items.len();
    if a.cumulative_every.is_some() && !labeled {
        return Err(Failure::input("--cumulative-every needs every item to carry a label"));
    }
    let w = items.first().map_or(1, StreamItem::len);

    let outcomes = run_trials(&items, &cfg, a.trials, a.order.into(), a.trace_votes, exec)?;
    fs::create_dir_all(&a.out).map_err(|e| Failure::input(format!("{}: {e}", a.out.display())))?;

    let mut trials = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        let t = o.trial;
        let mut f = create(&a.out.join(format!("assignments_trial{t}.csv")))?;
        write_assignments(&o.run.records, &mut f)?;
        if let Some(trace) = &o.run.trace {
            trace.write_csv(create(&a.out.join(format!("votes_trial{t}.csv")))?)?;
        }
        if let Some(every) = a.cumulative_every {
            let series = eval::cumulative_f1(&o.run.records, &labels, every)?;
            eval::write_cumulative_csv(&series, create(&a.out.join(format!("cumulative_f1_trial{t}.csv")))?)?;
        }
        let counters = o.run.counters();
        let bw = bandwidth(&a.traffic, items.len() as u64, o.run.wall_time_s, w);
        let (precision, recall, f1) = o.scores.map_or((f64::NAN, f64::NAN, f64::NAN), |s| (s.precision, s.recall, s.f1));
        trials.push(TrialMetrics {
            trial: t,
            seed: o.seed,
            labeling_distance_calls: counters.labeling_distance_calls,
            metrics: Metrics {
                precision,
                recall,
                f1,
                n: items.len(),
                k: params.k,
                p: Some(params.p),
                lambda: Some(params.lambda),
                distance_calls: Some(counters.distance_calls),
                wall_time_s: Some(o.run.wall_time_s),
                seq_per_s: bw.map(|b| b.sequences_per_s),
                est_bandwidth_bps: bw.map(|b| b.bits_per_s),
            },
        });
    }
    let report = ClusterReport {
        input: a.input.display().to_string(),
        distance: params.distance.to_string(),
        batch_size: cfg.batch_size(),
        order: format!("{:?}", a.order).to_lowercase(),
        expected_distance_calls: cfg.expected_distance_calls(items.len()),
        summary: summarize(&outcomes),
        trials,
    };
    let mut f = create(&a.out.join("metrics.json"))?;
    write_json(&report, &mut f)?;
    f.flush().map_err(Error::from)?;
    if labeled {
        let s = &report.summary;
        eprintln!("f1 {:.4} +- {:.4} over {} trials", s.f1_mean, s.f1_std, s.trials);
    }
    Ok(())
}

pub fn evaluate(a: EvaluateArgs) -> CmdResult {
    let items = load(&a.items)?;
    let file = File::open(&a.assignments).map_err(|e| Failure::input(format!("{}: {e}", a.assignments.display())))?;
    let records = read_assignments(BufReader::new(file))?;
    let labels = label_map(&items);
    let scores = eval::pairwise_f1(&records, &labels)?;
    let metrics = Metrics::from_scores(&scores, &records);
    with_output(a.out.as_deref(), |w| write_json(&metrics, w))
}

#[derive(Serialize)]
struct BenchRow {
    n: usize,
    p: usize,
    f1_mean: f64,
    f1_std: f64,
    runtime_s: f64,
    distance_calls: u64,
    pam_f1: Option<f64>,
    pam_runtime_s: Option<f64>,
}

fn bench_items(a: &BenchArgs, k: usize, n_max: usize) -> Result<Vec<StreamItem>, Failure> {
    if let Some(path) = &a.input {
        let items = load(path)?;
        if items.len() < n_max {
            return Err(Failure::input(format!("{} holds {} items, grid needs {n_max}", path.display(), items.len())));
        }
        return Ok(items);
    }
    let seed = a.model.seed;
    let items = match a.dataset {
        BenchData::Blobs => {
            let stds: Vec<f64> = (0..k).map(|c| 0.5 + 0.1 * (c % 10) as f64).collect();
            gen_blobs(n_max.div_ceil(k) * k, k, &stds, seed)?
        }
        BenchData::Sine | BenchData::SineDrifted => {
            let configs = sine_configs(k.min(4))?;
            let drift = match a.dataset {
                BenchData::SineDrifted => DriftConfig::incremental(0.05),
                _ => DriftConfig::none(),
            };
            let classes = configs.len();
            gen_sine(n_max.div_ceil(classes) * classes, &configs, 100, drift, seed)?
        }
    };
    Ok(items)
}

pub fn bench(a: BenchArgs, exec: Execution) -> CmdResult {
    let base = a.model.params()?;
    if a.ns.is_empty() || a.trials == 0 {
        return Err(Failure::config("--ns must be non-empty and --trials at least 1"));
    }
    let ps = if a.ps.is_empty() { vec![base.p] } else { a.ps.clone() };
    let n_max = *a.ns.iter().max().expect("non-empty");
    let items = bench_items(&a, base.k, n_max)?;
    let mut rows = Vec::new();
    for &n in &a.ns {
        let stream = &items[..n];
        let labels = label_map(stream);
        let (pam, pam_time) = if a.with_oracle {
            let fit: Vec<StreamItem> = order_stream(stream.to_vec(), StreamOrder::shuffled(base.seed))
                .into_iter()
                .take(a.oracle_max)
                .collect();
            let start = Instant::now();
            let f1 = pam_f1(&fit, base.k, base.distance, &labels, exec)?;
            (Some(f1), Some(start.elapsed().as_secs_f64()))
        } else {
            (None, None)
        };
        for &p in &ps {
            let params = ModelParams { p, ..base };
            params.validate()?;
            let cfg = ClusterConfig {
                params,
                batch_factor: a.model.batch_factor,
            };
            let outcomes = run_trials(stream, &cfg, a.trials, a.order.into(), false, exec)?;
            let s = summarize(&outcomes);
            rows.push(BenchRow {
                n,
                p,
                f1_mean: s.f1_mean,
                f1_std: s.f1_std,
                runtime_s: s.runtime_mean_s,
                distance_calls: outcomes[0].run.counters().distance_calls,
                pam_f1: pam,
                pam_runtime_s: pam_time,
            });
        }
    }
    with_output(a.out.as_deref(), |w| write_bench_csv(&rows, w))
}

fn write_bench_csv(rows: &[BenchRow], w: &mut dyn Write) -> Result<(), Error> {
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    writeln!(w, "n,p,f1_mean,f1_std,runtime_s,distance_calls,pam_f1,pam_runtime_s")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.p,
            r.f1_mean,
            r.f1_std,
            r.runtime_s,
            r.distance_calls,
            opt(r.pam_f1),
            opt(r.pam_runtime_s)
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SampleReport {
    batch_size: usize,
    #[serde(flatten)]
    sampling: SamplingSummary,
    throughput: Option<ThroughputReport>,
}

pub fn sample(a: SampleArgs) -> CmdResult {
    let params = a.model.params()?;
    if a.every == 0 {
        return Err(Failure::config("--every must be at least 1"));
    }
    let items = load(&a.input)?;
    let cfg = ClusterConfig {
        params,
        batch_factor: a.model.batch_factor,
    };
    let b = cfg.batch_size();
    if items.len() < b {
        return Err(Error::InsufficientBatch { got: items.len(), need: b }.into());
    }
    let w = items[0].len();
    let mut model = ModelState::init(&items[..b], &params)?;
    let policy = SnapshotPolicy {
        every_n_items: a.every,
        max_snapshots: a.max_snapshots,
    };
    let mut out = create(&a.out)?;
    let summary = run_sampling(&mut model, items[b..].iter().cloned(), &policy, &mut out)?;
    let throughput = bandwidth(&a.traffic, summary.items, summary.wall_time_s, w);
    let report = SampleReport {
        batch_size: b,
        sampling: summary,
        throughput,
    };
    with_output(None, |w| write_json(&report, w))
}
