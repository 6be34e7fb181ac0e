//! CSV artifact writers and the readers `report` uses to render them.
//!
//! All files are UTF-8 CSV with a header row. Floats are written with the
//! shortest round-trip representation so artifacts are byte-stable.

use std::path::Path;

use omiclust_core::consensus::{CdfCurve, KSelectionReport};
use omiclust_core::{
    ClusterAssignment, Dendrogram, Error, Matrix, Result, SilhouetteReport, SymmetricMatrix,
};

pub fn write_assignment(
    path: &Path,
    sample_ids: &[String],
    assignment: &ClusterAssignment,
) -> Result<()> {
    let mut out = String::from("sample_id,cluster\n");
    for (id, label) in sample_ids.iter().zip(assignment.labels()) {
        out.push_str(&format!("{id},{label}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_silhouette(
    path: &Path,
    sample_ids: &[String],
    assignment: &ClusterAssignment,
    report: &SilhouetteReport,
) -> Result<()> {
    let mut out = String::from("sample_id,cluster,silhouette_width\n");
    for ((id, label), width) in sample_ids
        .iter()
        .zip(assignment.labels())
        .zip(&report.widths)
    {
        out.push_str(&format!("{id},{label},{width}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Square matrix with sample IDs as both the header row and first column.
pub fn write_symmetric(path: &Path, sample_ids: &[String], m: &SymmetricMatrix) -> Result<()> {
    let mut out = String::from("sample_id");
    for id in sample_ids {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    for (i, id) in sample_ids.iter().enumerate() {
        out.push_str(id);
        for j in 0..m.n() {
            out.push_str(&format!(",{}", m.get(i, j)));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_cdf(path: &Path, curve: &CdfCurve) -> Result<()> {
    let mut out = String::from("consensus_index,cdf\n");
    for (x, y) in curve.grid.iter().zip(&curve.cdf) {
        out.push_str(&format!("{x},{y}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_delta_area(path: &Path, report: &KSelectionReport) -> Result<()> {
    let mut out = String::from("k,area,delta_area,flatness,chosen\n");
    for entry in &report.entries {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            entry.k,
            entry.curve.area,
            entry.delta_area,
            entry.curve.flatness,
            entry.k == report.chosen_k
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_dendrogram(path: &Path, dend: &Dendrogram) -> Result<()> {
    let mut out = String::from("step,left,right,height,size\n");
    for (step, merge) in dend.merges().iter().enumerate() {
        out.push_str(&format!(
            "{step},{},{},{},{}\n",
            merge.left, merge.right, merge.height, merge.size
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_centers(path: &Path, feature_ids: &[String], centers: &Matrix) -> Result<()> {
    let mut out = String::from("cluster");
    for id in feature_ids {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    for c in 0..centers.rows() {
        out.push_str(&format!("{c}"));
        for v in centers.row(c) {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(text.lines().map(str::to_owned).collect())
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64> {
    field.parse().map_err(|_| Error::Parse {
        path: path.display().to_string(),
        line,
        message: format!("expected a number, found {field:?}"),
    })
}

/// Reads a square matrix written by [`write_symmetric`].
pub fn read_square_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(Error::Data(format!("{} is empty", path.display())));
    }
    let ids: Vec<String> = lines[0].split(',').skip(1).map(str::to_owned).collect();
    let mut rows = Vec::with_capacity(ids.len());
    for (idx, line) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != ids.len() + 1 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: idx + 2,
                message: format!("expected {} fields, found {}", ids.len() + 1, fields.len()),
            });
        }
        let mut row = Vec::with_capacity(ids.len());
        for field in &fields[1..] {
            row.push(parse_f64(path, idx + 2, field)?);
        }
        rows.push(row);
    }
    if rows.len() != ids.len() {
        return Err(Error::Data(format!(
            "{} is not square: {} columns but {} rows",
            path.display(),
            ids.len(),
            rows.len()
        )));
    }
    Ok((ids, rows))
}

/// Reads (sample_id, cluster, width) rows written by [`write_silhouette`].
pub fn read_silhouette_csv(path: &Path) -> Result<Vec<(String, usize, f64)>> {
    let lines = read_lines(path)?;
    let mut rows = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let cluster: usize = fields[1].parse().map_err(|_| Error::Parse {
            path: path.display().to_string(),
            line: idx + 1,
            message: format!("expected a cluster id, found {:?}", fields[1]),
        })?;
        let width = parse_f64(path, idx + 1, fields[2])?;
        rows.push((fields[0].to_owned(), cluster, width));
    }
    if rows.is_empty() {
        return Err(Error::Data(format!("{} has no data rows", path.display())));
    }
    Ok(rows)
}

/// Reads (grid, cdf) columns written by [`write_cdf`].
pub fn read_cdf_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let lines = read_lines(path)?;
    let mut grid = Vec::new();
    let mut cdf = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        grid.push(parse_f64(path, idx + 1, fields[0])?);
        cdf.push(parse_f64(path, idx + 1, fields[1])?);
    }
    if grid.is_empty() {
        return Err(Error::Data(format!("{} has no data rows", path.display())));
    }
    Ok((grid, cdf))
}
