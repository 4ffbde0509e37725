//! Distance functions over [`StreamItem`]s.
//!
//! Both functions are pure and may be evaluated concurrently.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::item::StreamItem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Euclidean,
    Dtw,
}

/// A distance selection: Euclidean, or DTW with an optional Sakoe-Chiba band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DistanceFn {
    pub kind: DistanceKind,
    /// Band half-width for DTW; `None` means unconstrained. Ignored for Euclidean.
    pub band: Option<usize>,
}

impl DistanceFn {
    pub const EUCLIDEAN: DistanceFn = DistanceFn {
        kind: DistanceKind::Euclidean,
        band: None,
    };

    pub const DTW: DistanceFn = DistanceFn {
        kind: DistanceKind::Dtw,
        band: None,
    };

    pub fn dtw_banded(band: usize) -> Self {
        DistanceFn {
            kind: DistanceKind::Dtw,
            band: Some(band),
        }
    }

    pub fn eval(&self, a: &StreamItem, b: &StreamItem) -> Result<f64> {
        match self.kind {
            DistanceKind::Euclidean => euclidean(a, b),
            DistanceKind::Dtw => dtw(a, b, self.band),
        }
    }
}

impl Default for DistanceFn {
    fn default() -> Self {
        Self::EUCLIDEAN
    }
}

impl fmt::Display for DistanceFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.band) {
            (DistanceKind::Euclidean, _) => f.write_str("euclidean"),
            (DistanceKind::Dtw, None) => f.write_str("dtw"),
            (DistanceKind::Dtw, Some(band)) => write!(f, "dtw:{band}"),
        }
    }
}

impl FromStr for DistanceFn {
    type Err = Error;

    /// Accepts `euclidean`, `dtw` and `dtw:<band>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Self::EUCLIDEAN),
            "dtw" => Ok(Self::DTW),
            other => other
                .strip_prefix("dtw:")
                .and_then(|b| b.parse().ok())
                .map(Self::dtw_banded)
                .ok_or_else(|| Error::BadConfig(format!("unknown distance {other:?}"))),
        }
    }
}

/// Flattened L2 norm over all dimensions and time steps.
pub fn euclidean(a: &StreamItem, b: &StreamItem) -> Result<f64> {
    if a.dims() != b.dims() || a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "euclidean needs equal shapes, got {}x{} and {}x{}",
            a.dims(),
            a.len(),
            b.dims(),
            b.len()
        )));
    }
    let sum: f64 = a
        .flat()
        .iter()
        .zip(b.flat())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum.sqrt())
}

#[inline]
pub(crate) fn local_cost(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Classical DTW with unsquared L2 local cost and no length normalization.
///
/// With a band, cells where `|i - j| > band` are infeasible.
pub fn dtw(a: &StreamItem, b: &StreamItem, band: Option<usize>) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::ShapeMismatch(format!(
            "dtw needs equal dimensionality, got {} and {}",
            a.dims(),
            b.dims()
        )));
    }
    let (n, m) = (a.len(), b.len());
    if let Some(band) = band {
        if n.abs_diff(m) > band {
            return Err(Error::BandInfeasible {
                band,
                len_a: n,
                len_b: m,
            });
        }
    }
    let band = band.unwrap_or(usize::MAX);

    // prev[j + 1] holds D(i - 1, j); index 0 is the infinite left border.
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 0..n {
        curr.fill(f64::INFINITY);
        let lo = i.saturating_sub(band);
        let hi = i.saturating_add(band).min(m - 1);
        let ai = a.step(i);
        for j in lo..=hi {
            let best = prev[j].min(prev[j + 1]).min(curr[j]);
            curr[j + 1] = local_cost(ai, b.step(j)) + best;
        }
        std::mem::swap(&mut prev, &mut curr);
        prev[0] = f64::INFINITY;
    }
    Ok(prev[m])
}
