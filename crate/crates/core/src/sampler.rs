//! Periodic medoid snapshots as a compact summary of a sequence stream.
//!
//! Snapshot `i` is written right after item `i * every_n_items`. A final
//! snapshot is added at the end of the stream unless the last item already
//! landed on the cadence. Each snapshot is one line of JSON.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::item::StreamItem;
use crate::model::ModelState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotPolicy {
    pub every_n_items: usize,
    /// Upper bound on snapshots written, final one included.
    pub max_snapshots: Option<usize>,
}

impl SnapshotPolicy {
    pub fn every(n: usize) -> Self {
        SnapshotPolicy {
            every_n_items: n,
            max_snapshots: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingSummary {
    pub items: u64,
    pub snapshots: u64,
    pub bytes_written: u64,
    pub distance_calls: u64,
    pub wall_time_s: f64,
}

struct Sink<'w, W: Write> {
    out: &'w mut W,
    written: u64,
    bytes: u64,
    limit: Option<usize>,
}

impl<W: Write> Sink<'_, W> {
    fn full(&self) -> bool {
        self.limit.is_some_and(|m| self.written as usize >= m)
    }

    fn put(&mut self, model: &ModelState) -> std::io::Result<()> {
        if self.full() {
            return Ok(());
        }
        let mut line = model.snapshot().to_json();
        line.push('\n');
        self.out.write_all(line.as_bytes())?;
        self.written += 1;
        self.bytes += line.len() as u64;
        Ok(())
    }
}

/// Streams `stream` through `model`, writing snapshots to `sink`.
pub fn run_sampling<I, W>(
    model: &mut ModelState,
    stream: I,
    policy: &SnapshotPolicy,
    sink: &mut W,
) -> Result<SamplingSummary>
where
    I: IntoIterator<Item = StreamItem>,
    W: Write,
{
    if policy.every_n_items == 0 {
        return Err(Error::BadConfig("snapshot interval must be at least 1".into()));
    }
    let start = Instant::now();
    let calls_before = model.counters().distance_calls;
    let mut sink = Sink {
        out: sink,
        written: 0,
        bytes: 0,
        limit: policy.max_snapshots,
    };
    let mut items = 0u64;
    let mut on_cadence = false;
    let fail = |items, snapshots, source| Error::SinkFailure {
        items,
        snapshots,
        source,
    };
    for s in stream {
        model.step(s)?;
        items += 1;
        on_cadence = items.is_multiple_of(policy.every_n_items as u64);
        if on_cadence {
            sink.put(model).map_err(|e| fail(items, sink.written, e))?;
        }
    }
    if !on_cadence {
        sink.put(model).map_err(|e| fail(items, sink.written, e))?;
    }
    sink.out.flush().map_err(|e| fail(items, sink.written, e))?;
    Ok(SamplingSummary {
        items,
        snapshots: sink.written,
        bytes_written: sink.bytes,
        distance_calls: model.counters().distance_calls - calls_before,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
