//! Pairwise distances between the rows of a data matrix.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, SymmetricMatrix};

/// Row-to-row dissimilarity metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    SquaredEuclidean,
    /// 1 - Pearson correlation; rows must have nonzero variance.
    Correlation,
}

impl Default for Metric {
    fn default() -> Self {
        Metric::Euclidean
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "squared_euclidean" => Ok(Metric::SquaredEuclidean),
            "correlation" => Ok(Metric::Correlation),
            other => Err(Error::Config(format!("unknown distance metric: {other}"))),
        }
    }
}

/// Squared euclidean distance, accumulated directly over coordinate
/// differences. The expanded dot-product form is avoided so the result can
/// never go negative from round-off.
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

fn centered(row: &[f64]) -> (Vec<f64>, f64) {
    let mean = row.iter().sum::<f64>() / row.len() as f64;
    let c: Vec<f64> = row.iter().map(|v| v - mean).collect();
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    (c, norm)
}

/// Pairwise distance matrix over the rows of `x`.
///
/// Output is exactly symmetric with a zero diagonal. Rows are processed in
/// parallel but every entry is computed independently, so the result does not
/// depend on the thread count.
pub fn pairwise_distances(x: &Matrix, metric: Metric) -> Result<SymmetricMatrix> {
    let n = x.rows();
    if n == 0 {
        return Err(Error::Data("cannot compute distances of an empty matrix".into()));
    }
    let prepared: Option<Vec<(Vec<f64>, f64)>> = match metric {
        Metric::Correlation => {
            let rows: Vec<(Vec<f64>, f64)> = (0..n).map(|i| centered(x.row(i))).collect();
            for (i, (_, norm)) in rows.iter().enumerate() {
                if *norm == 0.0 {
                    return Err(Error::Data(format!(
                        "correlation metric requires nonzero variance, but row {i} is constant"
                    )));
                }
            }
            Some(rows)
        }
        _ => None,
    };

    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| match metric {
                    Metric::Euclidean => euclidean(x.row(i), x.row(j)),
                    Metric::SquaredEuclidean => squared_euclidean(x.row(i), x.row(j)),
                    Metric::Correlation => {
                        let rows = prepared.as_ref().unwrap();
                        let (ci, ni) = &rows[i];
                        let (cj, nj) = &rows[j];
                        let dot: f64 = ci.iter().zip(cj).map(|(a, b)| a * b).sum();
                        let r = (dot / (ni * nj)).clamp(-1.0, 1.0);
                        1.0 - r
                    }
                })
                .collect()
        })
        .collect();

    let mut d = SymmetricMatrix::zeros(n);
    for i in 0..n {
        for (off, &v) in upper[i].iter().enumerate() {
            d.set(i, i + 1 + off, v);
        }
    }
    Ok(d)
}
