use serde::{Deserialize, Serialize};

/// One sampled iteration of a run. Lyapunov values are present only when
/// the recorder was given a norm transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub loss: f64,
    pub consensus_error: f64,
    pub projection_error: f64,
    pub grad_avg_norm: f64,
    pub phi1: Option<f64>,
    pub phi2: Option<f64>,
    pub phi3: Option<f64>,
    pub phi4: Option<f64>,
    pub v_min: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub label: String,
    pub records: Vec<TraceRecord>,
}

impl RunTrace {
    pub fn new(label: impl Into<String>) -> Self {
        RunTrace { label: label.into(), records: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.last().map(|r| r.loss)
    }

    /// Loss at iteration `k`, if that iteration was recorded.
    pub fn loss_at(&self, k: usize) -> Option<f64> {
        self.records.binary_search_by_key(&k, |r| r.k).ok().map(|i| self.records[i].loss)
    }

    /// First recorded iteration whose loss is at or below `threshold`.
    pub fn iterations_to(&self, threshold: f64) -> Option<usize> {
        self.records.iter().find(|r| r.loss <= threshold).map(|r| r.k)
    }

    pub(crate) fn push(&mut self, rec: TraceRecord) {
        debug_assert!(self.records.last().is_none_or(|r| r.k < rec.k));
        self.records.push(rec);
    }
}

/// Which iterations get recorded: every `every`-th iteration up to
/// `coarse_after`, every `coarse_every`-th afterwards. The first and last
/// iterations of a run are always recorded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordStride {
    pub every: usize,
    pub coarse_after: usize,
    pub coarse_every: usize,
}

impl Default for RecordStride {
    fn default() -> Self {
        RecordStride { every: 1, coarse_after: 10_000, coarse_every: 10 }
    }
}

impl RecordStride {
    pub fn dense() -> Self {
        RecordStride { every: 1, coarse_after: usize::MAX, coarse_every: 1 }
    }

    pub fn includes(&self, k: usize) -> bool {
        if k <= self.coarse_after {
            k.is_multiple_of(self.every.max(1))
        } else {
            k.is_multiple_of(self.coarse_every.max(1))
        }
    }
}
