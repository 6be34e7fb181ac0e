//! Loading, merging, and variance-based feature selection of expression
//! matrices.
//!
//! File format: TSV or CSV (delimiter sniffed from the header line), UTF-8,
//! a header of IDs, numeric body cells with the literal token `NA` marking a
//! missing value.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Whether the file stores one feature per row (expression convention) or
/// one sample per row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    FeaturesAsRows,
    SamplesAsRows,
}

impl std::str::FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "features_as_rows" => Ok(Orientation::FeaturesAsRows),
            "samples_as_rows" => Ok(Orientation::SamplesAsRows),
            other => Err(Error::Config(format!("unknown orientation: {other}"))),
        }
    }
}

/// Samples-by-features expression matrix. Missing cells are held as NaN
/// internally until preprocessing removes them; [`ExpressionMatrix::to_matrix`]
/// refuses to hand out a matrix while any are left.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionMatrix {
    sample_ids: Vec<String>,
    feature_ids: Vec<String>,
    values: Vec<f64>,
}

fn check_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::Data(format!("duplicate {what} ID: {id}")));
        }
    }
    Ok(())
}

impl ExpressionMatrix {
    pub fn new(
        sample_ids: Vec<String>,
        feature_ids: Vec<String>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != sample_ids.len() * feature_ids.len() {
            return Err(Error::Data(format!(
                "expression matrix {}x{} does not match {} values",
                sample_ids.len(),
                feature_ids.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| v.is_infinite()) {
            return Err(Error::Data("infinite expression value".into()));
        }
        check_unique(&sample_ids, "sample")?;
        check_unique(&feature_ids, "feature")?;
        Ok(Self {
            sample_ids,
            feature_ids,
            values,
        })
    }

    pub fn from_matrix(
        sample_ids: Vec<String>,
        feature_ids: Vec<String>,
        matrix: &Matrix,
    ) -> Result<Self> {
        Self::new(sample_ids, feature_ids, matrix.values().to_vec())
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn feature_ids(&self) -> &[String] {
        &self.feature_ids
    }

    pub fn get(&self, sample: usize, feature: usize) -> f64 {
        self.values[sample * self.feature_ids.len() + feature]
    }

    pub fn is_missing(&self, sample: usize, feature: usize) -> bool {
        self.get(sample, feature).is_nan()
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }

    /// Dense numeric matrix; fails while missing values remain.
    pub fn to_matrix(&self) -> Result<Matrix> {
        if self.has_missing() {
            return Err(Error::Data(
                "expression matrix still contains missing values; run merge/preprocess first"
                    .into(),
            ));
        }
        Matrix::new(
            self.n_samples(),
            self.n_features(),
            self.values.clone(),
        )
    }

    pub fn select_samples(&self, idx: &[usize]) -> ExpressionMatrix {
        let p = self.n_features();
        let mut values = Vec::with_capacity(idx.len() * p);
        for &i in idx {
            values.extend_from_slice(&self.values[i * p..(i + 1) * p]);
        }
        ExpressionMatrix {
            sample_ids: idx.iter().map(|&i| self.sample_ids[i].clone()).collect(),
            feature_ids: self.feature_ids.clone(),
            values,
        }
    }

    pub fn select_features(&self, idx: &[usize]) -> ExpressionMatrix {
        let p = self.n_features();
        let mut values = Vec::with_capacity(idx.len() * self.n_samples());
        for i in 0..self.n_samples() {
            let row = &self.values[i * p..(i + 1) * p];
            values.extend(idx.iter().map(|&j| row[j]));
        }
        ExpressionMatrix {
            sample_ids: self.sample_ids.clone(),
            feature_ids: idx.iter().map(|&j| self.feature_ids[j].clone()).collect(),
            values,
        }
    }
}

fn sniff_delimiter(header: &str) -> char {
    if header.contains('\t') {
        '\t'
    } else {
        ','
    }
}

/// Reads a TSV/CSV expression file; the result is always samples x features
/// regardless of the file orientation.
pub fn load_expression_matrix(path: &Path, orientation: Orientation) -> Result<ExpressionMatrix> {
    let text = std::fs::read_to_string(path)?;
    let path_str = path.display().to_string();
    parse_expression_matrix(&text, orientation, &path_str)
}

fn parse_expression_matrix(
    text: &str,
    orientation: Orientation,
    path: &str,
) -> Result<ExpressionMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            message: "file is empty".into(),
        });
    };
    let delim = sniff_delimiter(header);
    let header_fields: Vec<&str> = header.split(delim).collect();
    // first header cell is the corner label and may be empty
    let col_ids: Vec<String> = header_fields[1..].iter().map(|s| s.trim().to_string()).collect();
    let n_cols = col_ids.len();
    if n_cols == 0 {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            message: "header has no IDs".into(),
        });
    }

    let mut row_ids = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(delim).collect();
        if fields.len() != n_cols + 1 {
            return Err(Error::Parse {
                path: path.into(),
                line: lineno,
                message: format!(
                    "expected {} fields but found {}",
                    n_cols + 1,
                    fields.len()
                ),
            });
        }
        row_ids.push(fields[0].trim().to_string());
        let mut row = Vec::with_capacity(n_cols);
        for cell in &fields[1..] {
            let cell = cell.trim();
            if cell == "NA" {
                row.push(f64::NAN);
            } else {
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => row.push(v),
                    _ => {
                        return Err(Error::Parse {
                            path: path.into(),
                            line: lineno,
                            message: format!("cell '{cell}' is neither numeric nor NA"),
                        })
                    }
                }
            }
        }
        rows.push(row);
    }

    let (sample_ids, feature_ids, values) = match orientation {
        Orientation::SamplesAsRows => (row_ids, col_ids, rows.concat()),
        Orientation::FeaturesAsRows => {
            let n_samples = n_cols;
            let n_features = rows.len();
            let mut values = vec![0.0; n_samples * n_features];
            for (f, row) in rows.iter().enumerate() {
                for (s, &v) in row.iter().enumerate() {
                    values[s * n_features + f] = v;
                }
            }
            (col_ids, row_ids, values)
        }
    };
    ExpressionMatrix::new(sample_ids, feature_ids, values)
}

fn format_cell(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        format!("{v}")
    }
}

/// Writes the matrix in the same TSV format `load_expression_matrix` reads;
/// values round-trip bit-for-bit.
pub fn write_expression_matrix(
    path: &Path,
    x: &ExpressionMatrix,
    orientation: Orientation,
) -> Result<()> {
    let mut out = String::new();
    match orientation {
        Orientation::SamplesAsRows => {
            out.push_str("sample_id");
            for f in &x.feature_ids {
                let _ = write!(out, "\t{f}");
            }
            out.push('\n');
            for (i, s) in x.sample_ids.iter().enumerate() {
                out.push_str(s);
                for j in 0..x.n_features() {
                    let _ = write!(out, "\t{}", format_cell(x.get(i, j)));
                }
                out.push('\n');
            }
        }
        Orientation::FeaturesAsRows => {
            out.push_str("feature_id");
            for s in &x.sample_ids {
                let _ = write!(out, "\t{s}");
            }
            out.push('\n');
            for (j, f) in x.feature_ids.iter().enumerate() {
                out.push_str(f);
                for i in 0..x.n_samples() {
                    let _ = write!(out, "\t{}", format_cell(x.get(i, j)));
                }
                out.push('\n');
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// One named data view over the shared cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct View {
    pub name: String,
    pub data: ExpressionMatrix,
}

/// Views sharing an identical, identically ordered sample list with no
/// missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewSet {
    views: Vec<View>,
}

impl ViewSet {
    pub fn views(&self) -> &[View] {
        &self.views
    }

    pub fn sample_ids(&self) -> &[String] {
        self.views[0].data.sample_ids()
    }

    pub fn n_samples(&self) -> usize {
        self.views[0].data.n_samples()
    }

    /// All views' features concatenated into one samples x features matrix.
    pub fn stacked_matrix(&self) -> Result<Matrix> {
        let mats: Vec<Matrix> = self
            .views
            .iter()
            .map(|v| v.data.to_matrix())
            .collect::<Result<_>>()?;
        Matrix::hstack(&mats.iter().collect::<Vec<_>>())
    }

    /// Restricts every view to the given sample indices (shared across views).
    pub fn subset_samples(&self, idx: &[usize]) -> ViewSet {
        ViewSet {
            views: self
                .views
                .iter()
                .map(|v| View {
                    name: v.name.clone(),
                    data: v.data.select_samples(idx),
                })
                .collect(),
        }
    }

    /// Restricts each view to its own feature index list; one list per view.
    pub fn subset_features(&self, per_view: &[Vec<usize>]) -> ViewSet {
        ViewSet {
            views: self
                .views
                .iter()
                .zip(per_view)
                .map(|(v, idx)| View {
                    name: v.name.clone(),
                    data: v.data.select_features(idx),
                })
                .collect(),
        }
    }
}

/// Restricts all views to their shared samples (sorted lexicographically by
/// ID) and drops any feature that still has a missing value. Samples are
/// never dropped for missingness.
pub fn merge_views(views: Vec<View>) -> Result<ViewSet> {
    if views.is_empty() {
        return Err(Error::Data("merge_views needs at least one view".into()));
    }
    let mut shared: HashSet<&String> = views[0].data.sample_ids().iter().collect();
    for v in &views[1..] {
        let ids: HashSet<&String> = v.data.sample_ids().iter().collect();
        shared.retain(|id| ids.contains(*id));
    }
    let mut order: Vec<String> = shared.into_iter().cloned().collect();
    order.sort();
    if order.len() < 2 {
        return Err(Error::Data(format!(
            "views share only {} sample(s); at least 2 required",
            order.len()
        )));
    }

    let mut merged = Vec::with_capacity(views.len());
    for v in views {
        let idx: Vec<usize> = order
            .iter()
            .map(|id| {
                v.data
                    .sample_ids()
                    .iter()
                    .position(|s| s == id)
                    .expect("shared id present in every view")
            })
            .collect();
        let restricted = v.data.select_samples(&idx);
        // drop features with any missing value among the retained samples
        let keep: Vec<usize> = (0..restricted.n_features())
            .filter(|&j| (0..restricted.n_samples()).all(|i| !restricted.is_missing(i, j)))
            .collect();
        merged.push(View {
            name: v.name,
            data: restricted.select_features(&keep),
        });
    }
    Ok(ViewSet { views: merged })
}

/// Per-feature variance bookkeeping from a selection run.
#[derive(Debug, Clone)]
pub struct SelectionReport {
    /// (feature_id, sample variance, kept) in descending-variance order.
    pub entries: Vec<(String, f64, bool)>,
    /// Fraction of total variance carried by the kept features.
    pub variance_explained: f64,
}

impl SelectionReport {
    pub fn kept_feature_ids(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, _, kept)| *kept)
            .map(|(id, _, _)| id.as_str())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature_id,variance,kept\n");
        for (id, var, kept) in &self.entries {
            let _ = writeln!(out, "{id},{var},{kept}");
        }
        out
    }
}

/// Keeps the `n_top` features of largest sample variance (divisor n-1).
/// Ties break by feature ID, so the selection does not depend on input
/// column order; output columns come in descending-variance order.
pub fn select_by_variance(
    x: &ExpressionMatrix,
    n_top: usize,
) -> Result<(ExpressionMatrix, SelectionReport)> {
    let p = x.n_features();
    let n = x.n_samples();
    if n_top == 0 || n_top > p {
        return Err(Error::Config(format!(
            "n_top = {n_top} out of range for {p} features"
        )));
    }
    if n < 2 {
        return Err(Error::Config(
            "variance selection needs at least 2 samples".into(),
        ));
    }
    if x.has_missing() {
        return Err(Error::Data(
            "variance selection requires a matrix without missing values".into(),
        ));
    }
    let variances: Vec<f64> = (0..p)
        .map(|j| {
            let mean = (0..n).map(|i| x.get(i, j)).sum::<f64>() / n as f64;
            (0..n)
                .map(|i| {
                    let d = x.get(i, j) - mean;
                    d * d
                })
                .sum::<f64>()
                / (n - 1) as f64
        })
        .collect();

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        variances[b]
            .total_cmp(&variances[a])
            .then_with(|| x.feature_ids()[a].cmp(&x.feature_ids()[b]))
    });

    let kept_idx = &order[..n_top];
    let total: f64 = variances.iter().sum();
    let kept_sum: f64 = kept_idx.iter().map(|&j| variances[j]).sum();
    let variance_explained = if total > 0.0 { kept_sum / total } else { 1.0 };

    let entries = order
        .iter()
        .enumerate()
        .map(|(rank, &j)| (x.feature_ids()[j].clone(), variances[j], rank < n_top))
        .collect();
    let selected = x.select_features(kept_idx);
    Ok((
        selected,
        SelectionReport {
            entries,
            variance_explained,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn em(samples: &[&str], features: &[&str], values: &[f64]) -> ExpressionMatrix {
        ExpressionMatrix::new(
            samples.iter().map(|s| s.to_string()).collect(),
            features.iter().map(|s| s.to_string()).collect(),
            values.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn parses_features_as_rows_tsv() {
        let text = "gene\tS1\tS2\nG1\t1.5\t2\nG2\t3\t4\nG3\t5\t6\n";
        let x = parse_expression_matrix(text, Orientation::FeaturesAsRows, "t").unwrap();
        assert_eq!(x.n_samples(), 2);
        assert_eq!(x.n_features(), 3);
        assert_eq!(x.get(0, 0), 1.5);
        assert_eq!(x.get(1, 2), 6.0);
    }

    #[test]
    fn na_cells_become_missing_not_zero() {
        let text = "id,F1,F2\nS1,NA,2\nS2,3,4\n";
        let x = parse_expression_matrix(text, Orientation::SamplesAsRows, "t").unwrap();
        assert!(x.is_missing(0, 0));
        assert!(!x.is_missing(0, 1));
    }

    #[test]
    fn duplicate_sample_id_names_the_id() {
        let text = "id\tF1\nS1\t1\nS1\t2\n";
        let err = parse_expression_matrix(text, Orientation::SamplesAsRows, "t").unwrap_err();
        assert!(err.to_string().contains("S1"), "{err}");
    }

    #[test]
    fn ragged_row_reports_line_number() {
        let text = "id\tF1\tF2\nS1\t1\t2\nS2\t3\n";
        let err = parse_expression_matrix(text, Orientation::SamplesAsRows, "t").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn non_numeric_cell_rejected() {
        let text = "id\tF1\nS1\tabc\n";
        assert!(parse_expression_matrix(text, Orientation::SamplesAsRows, "t").is_err());
    }

    #[test]
    fn merge_intersects_and_sorts_samples() {
        let a = em(&["A", "B", "C"], &["F1"], &[1.0, 2.0, 3.0]);
        let b = em(&["B", "C", "D"], &["G1"], &[4.0, 5.0, 6.0]);
        let merged = merge_views(vec![
            View { name: "rna".into(), data: a },
            View { name: "mirna".into(), data: b },
        ])
        .unwrap();
        assert_eq!(merged.sample_ids(), &["B".to_string(), "C".to_string()]);
        assert_eq!(merged.views()[0].data.get(0, 0), 2.0);
        assert_eq!(merged.views()[1].data.get(0, 0), 4.0);
    }

    #[test]
    fn merge_drops_features_with_missing() {
        let a = em(
            &["A", "B"],
            &["F1", "F2"],
            &[1.0, f64::NAN, 3.0, 4.0],
        );
        let merged = merge_views(vec![View { name: "v".into(), data: a }]).unwrap();
        assert_eq!(merged.views()[0].data.feature_ids(), &["F1".to_string()]);
        assert!(!merged.views()[0].data.has_missing());
    }

    #[test]
    fn merge_single_clean_view_is_identity() {
        let a = em(&["A", "B"], &["F1", "F2"], &[1.0, 2.0, 3.0, 4.0]);
        let merged = merge_views(vec![View { name: "v".into(), data: a.clone() }]).unwrap();
        assert_eq!(merged.views()[0].data, a);
    }

    #[test]
    fn merge_is_idempotent() {
        let a = em(&["C", "A", "B"], &["F1", "F2"], &[1.0, f64::NAN, 3.0, 4.0, 5.0, 6.0]);
        let once = merge_views(vec![View { name: "v".into(), data: a }]).unwrap();
        let twice = merge_views(once.views().to_vec()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn merge_too_small_intersection_rejected() {
        let a = em(&["A", "B"], &["F1"], &[1.0, 2.0]);
        let b = em(&["B", "C"], &["F1"], &[1.0, 2.0]);
        assert!(merge_views(vec![
            View { name: "x".into(), data: a },
            View { name: "y".into(), data: b },
        ])
        .is_err());
    }

    #[test]
    fn variance_selection_hand_case() {
        let x = em(
            &["S1", "S2"],
            &["F1", "F2", "F3"],
            &[0.0, 0.0, 0.0, 4.0, 2.0, 0.0],
        );
        let (kept, report) = select_by_variance(&x, 1).unwrap();
        assert_eq!(kept.feature_ids(), &["F1".to_string()]);
        assert_eq!(report.entries[0].1, 8.0);
        assert_eq!(report.entries[1].1, 2.0);
        assert_eq!(report.entries[2].1, 0.0);
        assert!((report.variance_explained - 0.8).abs() < 1e-15);
    }

    #[test]
    fn variance_selection_keep_all_is_full_explained() {
        let x = em(&["S1", "S2"], &["F1", "F2"], &[0.0, 1.0, 2.0, 3.0]);
        let (kept, report) = select_by_variance(&x, 2).unwrap();
        assert_eq!(kept.n_features(), 2);
        assert_eq!(report.variance_explained, 1.0);
    }

    #[test]
    fn variance_ties_break_lexicographically() {
        let x = em(&["S1", "S2"], &["FB", "FA"], &[0.0, 0.0, 2.0, 2.0]);
        let (kept, _) = select_by_variance(&x, 1).unwrap();
        assert_eq!(kept.feature_ids(), &["FA".to_string()]);
    }

    #[test]
    fn selection_independent_of_column_order() {
        let x = em(&["S1", "S2"], &["FA", "FB", "FC"], &[0.0, 1.0, 5.0, 2.0, 3.0, 6.0]);
        let perm = x.select_features(&[2, 0, 1]);
        let (a, _) = select_by_variance(&x, 2).unwrap();
        let (b, _) = select_by_variance(&perm, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn n_top_out_of_range_rejected() {
        let x = em(&["S1", "S2"], &["F1"], &[0.0, 1.0]);
        assert!(select_by_variance(&x, 0).is_err());
        assert!(select_by_variance(&x, 2).is_err());
    }

    #[test]
    fn round_trip_preserves_bits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.tsv");
        let x = em(
            &["S1", "S2"],
            &["F1", "F2"],
            &[0.1, 1.0 / 3.0, f64::NAN, -2.5e-17],
        );
        write_expression_matrix(&path, &x, Orientation::FeaturesAsRows).unwrap();
        let back = load_expression_matrix(&path, Orientation::FeaturesAsRows).unwrap();
        assert_eq!(back.sample_ids(), x.sample_ids());
        assert_eq!(back.feature_ids(), x.feature_ids());
        for i in 0..2 {
            for j in 0..2 {
                let (a, b) = (x.get(i, j), back.get(i, j));
                assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
            }
        }
    }
}
