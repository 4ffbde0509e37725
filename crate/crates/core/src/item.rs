use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One element of the stream: a `d x w` matrix of reals.
///
/// Values are stored time-major (`data[t * d + dim]`) so that a single time
/// step is a contiguous slice; the external JSON form is `d` rows of `w`
/// values each. The label is carried for evaluation and is never read by the
/// clustering engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ItemRecord", into = "ItemRecord")]
pub struct StreamItem {
    pub id: String,
    pub arrival_index: u64,
    pub label: Option<String>,
    dims: usize,
    len: usize,
    data: Vec<f64>,
}

/// Wire form of [`StreamItem`], one JSON object per JSONL line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ItemRecord {
    pub id: String,
    pub arrival_index: u64,
    pub label: Option<String>,
    pub values: Vec<Vec<f64>>,
}

impl StreamItem {
    /// Builds an item from `d` rows (dimensions) of `w` values (time steps).
    pub fn from_rows(
        id: impl Into<String>,
        arrival_index: u64,
        rows: &[Vec<f64>],
        label: Option<String>,
    ) -> Result<Self> {
        let id = id.into();
        let dims = rows.len();
        if dims == 0 {
            return Err(Error::InvalidItem(format!("{id}: values has no rows")));
        }
        let len = rows[0].len();
        if len == 0 {
            return Err(Error::InvalidItem(format!("{id}: values has no columns")));
        }
        if rows.iter().any(|r| r.len() != len) {
            return Err(Error::InvalidItem(format!("{id}: values is not rectangular")));
        }
        let mut data = Vec::with_capacity(dims * len);
        for t in 0..len {
            for row in rows {
                let v = row[t];
                if !v.is_finite() {
                    return Err(Error::InvalidItem(format!("{id}: non-finite value {v}")));
                }
                data.push(v);
            }
        }
        Ok(Self {
            id,
            arrival_index,
            label,
            dims,
            len,
            data,
        })
    }

    /// A univariate sequence (`d = 1`).
    pub fn univariate(
        id: impl Into<String>,
        arrival_index: u64,
        values: Vec<f64>,
        label: Option<String>,
    ) -> Result<Self> {
        Self::from_rows(id, arrival_index, &[values], label)
    }

    /// A single multi-dimensional point (`w = 1`).
    pub fn point(
        id: impl Into<String>,
        arrival_index: u64,
        coords: &[f64],
        label: Option<String>,
    ) -> Result<Self> {
        let rows: Vec<Vec<f64>> = coords.iter().map(|&c| vec![c]).collect();
        Self::from_rows(id, arrival_index, &rows, label)
    }

    /// Number of dimensions `d`.
    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Number of time steps `w`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The `d` values observed at time step `t`.
    #[inline]
    pub fn step(&self, t: usize) -> &[f64] {
        &self.data[t * self.dims..(t + 1) * self.dims]
    }

    /// All values, time-major.
    pub fn flat(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dims)
            .map(|dim| (0..self.len).map(|t| self.data[t * self.dims + dim]).collect())
            .collect()
    }

    /// Returns a copy with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= factor);
        out
    }
}

impl TryFrom<ItemRecord> for StreamItem {
    type Error = Error;

    fn try_from(r: ItemRecord) -> Result<Self> {
        StreamItem::from_rows(r.id, r.arrival_index, &r.values, r.label)
    }
}

impl From<StreamItem> for ItemRecord {
    fn from(item: StreamItem) -> Self {
        let values = item.rows();
        ItemRecord {
            id: item.id,
            arrival_index: item.arrival_index,
            label: item.label,
            values,
        }
    }
}
