//! Flat cluster assignments with canonical labelling.

use crate::error::{Error, Result};

/// Per-sample cluster labels in `[0, k)`.
///
/// Labels are canonicalized so clusters are numbered by first appearance;
/// every label in `[0, k)` occurs at least once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    labels: Vec<usize>,
    k: usize,
}

impl ClusterAssignment {
    /// Builds an assignment from raw labels, renumbering clusters by first
    /// appearance. Raw labels may be arbitrary cluster ids.
    pub fn from_labels(raw: &[usize]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Data("empty cluster assignment".into()));
        }
        let mut remap: Vec<(usize, usize)> = Vec::new();
        let mut labels = Vec::with_capacity(raw.len());
        for &r in raw {
            let mapped = match remap.iter().find(|(orig, _)| *orig == r) {
                Some(&(_, m)) => m,
                None => {
                    let m = remap.len();
                    remap.push((r, m));
                    m
                }
            };
            labels.push(mapped);
        }
        let k = remap.len();
        Ok(Self { labels, k })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Sample indices grouped per cluster, in label order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l].push(i);
        }
        groups
    }
}
