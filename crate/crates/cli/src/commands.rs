//! The six pipeline subcommands.
//!
//! Each command validates its configuration, runs the core routines, and
//! writes every artifact plus the resolved config into the output directory.

use std::path::{Path, PathBuf};

use omiclust_core::consensus::{
    consensus_cdf, consensus_matrix, consensus_partition, generate_ensemble, select_k,
    BaseAlgorithm, EnsembleConfig, CDF_GRID_POINTS,
};
use omiclust_core::ingest::{
    load_expression_matrix, merge_views, select_by_variance, write_expression_matrix, Orientation,
    SelectionReport, View, ViewSet,
};
use omiclust_core::snf::{snf_cluster, SnfParams};
use omiclust_core::spectral::{gaussian_affinity, spectral, AffinityScale};
use omiclust_core::synth::SyntheticSpec;
use omiclust_core::{
    cut_dendrogram, hierarchical, kmeans, pairwise_distances, reorder_for_heatmap,
    silhouette_widths, ClusterAssignment, Error, KMeansConfig, Linkage, Metric, Result,
    SilhouetteReport, SymmetricMatrix,
};

use crate::artifacts;
use crate::config::PipelineConfig;
use crate::svg;

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn metric_of(cfg: &PipelineConfig) -> Result<Metric> {
    cfg.metric.parse()
}

fn linkage_of(cfg: &PipelineConfig) -> Result<Linkage> {
    cfg.cluster.linkage.parse()
}

fn snf_params_of(cfg: &PipelineConfig, n_samples: usize) -> SnfParams {
    let mut params = SnfParams::defaults_for(n_samples);
    if cfg.cluster.snf_k_neighbors > 0 {
        params.k_neighbors = cfg.cluster.snf_k_neighbors;
    }
    params.mu = cfg.cluster.snf_mu;
    params.iterations = cfg.cluster.snf_iterations;
    params
}

/// Loads every configured view, merges the cohort, then applies per-view
/// variance selection on the merged (missing-free) data.
fn load_views(cfg: &PipelineConfig) -> Result<(ViewSet, Vec<(String, SelectionReport)>)> {
    if cfg.views.is_empty() {
        return Err(Error::Config(
            "no input views configured; add [[view]] entries or run synth first".into(),
        ));
    }
    let mut raw = Vec::with_capacity(cfg.views.len());
    for view in &cfg.views {
        let orientation: Orientation = view.orientation.parse()?;
        let data = load_expression_matrix(&view.path, orientation)?;
        raw.push(View {
            name: view.display_name(),
            data,
        });
    }
    let merged = merge_views(raw)?;
    let mut selected = Vec::with_capacity(cfg.views.len());
    let mut reports = Vec::with_capacity(cfg.views.len());
    for (view, view_cfg) in merged.views().iter().zip(&cfg.views) {
        let n_top = if view_cfg.n_top == 0 {
            view.data.n_features()
        } else {
            view_cfg.n_top
        };
        let (data, report) = select_by_variance(&view.data, n_top)?;
        reports.push((view.name.clone(), report));
        selected.push(View {
            name: view.name.clone(),
            data,
        });
    }
    Ok((merge_views(selected)?, reports))
}

fn stacked_feature_ids(views: &ViewSet) -> Vec<String> {
    let mut ids = Vec::new();
    for view in views.views() {
        for f in view.data.feature_ids() {
            ids.push(format!("{}:{}", view.name, f));
        }
    }
    ids
}

fn write_summary(dir: &Path, lines: &[(&str, String)]) -> Result<()> {
    let mut out = String::new();
    for (key, value) in lines {
        out.push_str(&format!("{key}: {value}\n"));
    }
    std::fs::write(dir.join("summary.txt"), out)?;
    Ok(())
}

fn parse_base(algorithm: &str) -> Result<BaseAlgorithm> {
    if algorithm == "spectral" {
        return Err(Error::Config(
            "spectral is not a consensus base algorithm; use kmeans, hier, or snf".into(),
        ));
    }
    algorithm.parse()
}

fn ensemble_config(cfg: &PipelineConfig, k: usize) -> Result<EnsembleConfig> {
    let mut ecfg = EnsembleConfig::new(
        parse_base(&cfg.cluster.algorithm)?,
        k,
        cfg.consensus.ensemble_size,
        cfg.seed,
    );
    ecfg.resample_fraction = cfg.consensus.resample_fraction;
    ecfg.feature_fraction = cfg.consensus.feature_fraction;
    ecfg.metric = metric_of(cfg)?;
    ecfg.linkage = linkage_of(cfg)?;
    if cfg.cluster.snf_k_neighbors > 0 {
        ecfg.snf = Some(snf_params_of(cfg, 0));
    }
    Ok(ecfg)
}

pub fn cmd_synth(cfg: &PipelineConfig) -> Result<()> {
    let spec = SyntheticSpec {
        k: cfg.synth.k,
        n_per_cluster: cfg.synth.n_per_cluster,
        dims: cfg.synth.dims,
        separation: cfg.synth.separation,
        views: cfg.synth.views,
        noise_views: cfg.synth.noise_views,
        seed: cfg.seed,
    };
    let (views, planted) = omiclust_core::synth::generate(&spec)?;
    ensure_dir(&cfg.output_dir)?;
    for view in views.views() {
        write_expression_matrix(
            &cfg.output_dir.join(format!("{}.tsv", view.name)),
            &view.data,
            Orientation::FeaturesAsRows,
        )?;
    }
    artifacts::write_assignment(&cfg.output_dir.join("labels.csv"), views.sample_ids(), &planted)?;
    cfg.write_into(&cfg.output_dir)?;
    println!(
        "wrote {} view(s) and planted labels for {} samples to {}",
        views.views().len(),
        views.n_samples(),
        cfg.output_dir.display()
    );
    Ok(())
}

pub fn cmd_preprocess(cfg: &PipelineConfig) -> Result<()> {
    let (views, reports) = load_views(cfg)?;
    ensure_dir(&cfg.output_dir)?;
    let mut summary: Vec<(&str, String)> = vec![
        ("samples", views.n_samples().to_string()),
        ("views", views.views().len().to_string()),
    ];
    let mut detail = Vec::new();
    for (view, (name, report)) in views.views().iter().zip(&reports) {
        write_expression_matrix(
            &cfg.output_dir.join(format!("merged_{name}.tsv")),
            &view.data,
            Orientation::FeaturesAsRows,
        )?;
        std::fs::write(
            cfg.output_dir.join(format!("selection_{name}.csv")),
            report.to_csv(),
        )?;
        detail.push((
            name.clone(),
            format!(
                "{} features kept, variance_explained {}",
                view.data.n_features(),
                report.variance_explained
            ),
        ));
    }
    for (name, line) in &detail {
        summary.push((name.as_str(), line.clone()));
    }
    write_summary(&cfg.output_dir, &summary)?;
    cfg.write_into(&cfg.output_dir)?;
    println!(
        "merged {} view(s) over {} shared samples into {}",
        views.views().len(),
        views.n_samples(),
        cfg.output_dir.display()
    );
    Ok(())
}

pub fn cmd_cluster(cfg: &PipelineConfig) -> Result<()> {
    let (views, _) = load_views(cfg)?;
    let metric = metric_of(cfg)?;
    let k = cfg.cluster.k;
    ensure_dir(&cfg.output_dir)?;
    let (assignment, silhouette_distance): (ClusterAssignment, SymmetricMatrix) =
        match cfg.cluster.algorithm.as_str() {
            "kmeans" => {
                let stacked = views.stacked_matrix()?;
                let result = kmeans(&stacked, &KMeansConfig::new(k, cfg.seed))?;
                artifacts::write_centers(
                    &cfg.output_dir.join("kmeans_centers.csv"),
                    &stacked_feature_ids(&views),
                    &result.centers,
                )?;
                let d = pairwise_distances(&stacked, metric)?;
                (result.assignment, d)
            }
            "hier" | "hierarchical" => {
                let stacked = views.stacked_matrix()?;
                let d = pairwise_distances(&stacked, metric)?;
                let dend = hierarchical(&d, linkage_of(cfg)?)?;
                artifacts::write_dendrogram(&cfg.output_dir.join("dendrogram.csv"), &dend)?;
                (cut_dendrogram(&dend, k)?, d)
            }
            "spectral" => {
                let stacked = views.stacked_matrix()?;
                let d = pairwise_distances(&stacked, metric)?;
                let affinity = gaussian_affinity(&d, AffinityScale::GlobalMedian)?;
                (spectral(&affinity, k, cfg.seed)?, d)
            }
            "snf" => {
                let params = snf_params_of(cfg, views.n_samples());
                let (assignment, fused) = snf_cluster(&views, k, &params, metric, cfg.seed)?;
                artifacts::write_symmetric(
                    &cfg.output_dir.join("fused_matrix.csv"),
                    views.sample_ids(),
                    &fused.fused,
                )?;
                (assignment, fused.fused_distance())
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown algorithm {other:?}; expected kmeans, hier, spectral, or snf"
                )))
            }
        };
    let report = silhouette_report(&silhouette_distance, &assignment)?;
    write_partition_artifacts(&cfg.output_dir, views.sample_ids(), &assignment, &report)?;
    write_summary(
        &cfg.output_dir,
        &[
            ("algorithm", cfg.cluster.algorithm.clone()),
            ("k", assignment.k().to_string()),
            ("samples", assignment.len().to_string()),
            ("asw", asw_line(&report)),
        ],
    )?;
    cfg.write_into(&cfg.output_dir)?;
    println!(
        "{} clustering of {} samples at k={} -> asw {} ({})",
        cfg.cluster.algorithm,
        assignment.len(),
        assignment.k(),
        asw_line(&report),
        cfg.output_dir.display()
    );
    Ok(())
}

/// Silhouette is undefined for k=1; record zero widths instead of failing
/// the whole run.
fn silhouette_report(
    d: &SymmetricMatrix,
    assignment: &ClusterAssignment,
) -> Result<SilhouetteReport> {
    if assignment.k() < 2 {
        return Ok(SilhouetteReport {
            widths: vec![0.0; assignment.len()],
            per_cluster: vec![vec![0.0; assignment.len()]],
            asw: 0.0,
            k: assignment.k(),
        });
    }
    silhouette_widths(d, assignment)
}

fn asw_line(report: &SilhouetteReport) -> String {
    format!("{}", report.asw)
}

fn write_partition_artifacts(
    dir: &Path,
    sample_ids: &[String],
    assignment: &ClusterAssignment,
    report: &SilhouetteReport,
) -> Result<()> {
    artifacts::write_assignment(&dir.join("assignment.csv"), sample_ids, assignment)?;
    artifacts::write_silhouette(&dir.join("silhouette.csv"), sample_ids, assignment, report)
}

fn consensus_distance(values: &SymmetricMatrix) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(values.n(), |i, j| {
        if i == j {
            0.0
        } else {
            1.0 - values.get(i, j)
        }
    })
}

pub fn cmd_consensus(cfg: &PipelineConfig) -> Result<()> {
    let (views, _) = load_views(cfg)?;
    let k = cfg.cluster.k;
    let ecfg = ensemble_config(cfg, k)?;
    let ensemble = generate_ensemble(&views, &ecfg)?;
    let matrix = consensus_matrix(&ensemble)?;
    let curve = consensus_cdf(&matrix, CDF_GRID_POINTS)?;
    let assignment = consensus_partition(&matrix, k, cfg.seed)?;
    let report = silhouette_report(&consensus_distance(&matrix.values), &assignment)?;

    ensure_dir(&cfg.output_dir)?;
    let ids = views.sample_ids();
    artifacts::write_symmetric(&cfg.output_dir.join("consensus_matrix.csv"), ids, &matrix.values)?;
    let order = reorder_for_heatmap(&matrix.values, &assignment);
    let ordered_ids: Vec<String> = order.iter().map(|&i| ids[i].clone()).collect();
    let ordered =
        SymmetricMatrix::from_fn(matrix.n(), |i, j| matrix.values.get(order[i], order[j]));
    artifacts::write_symmetric(&cfg.output_dir.join("consensus_ordered.csv"), &ordered_ids, &ordered)?;
    artifacts::write_cdf(&cfg.output_dir.join("cdf.csv"), &curve)?;
    write_partition_artifacts(&cfg.output_dir, ids, &assignment, &report)?;
    write_summary(
        &cfg.output_dir,
        &[
            ("algorithm", format!("consensus over {}", cfg.cluster.algorithm)),
            ("k", assignment.k().to_string()),
            ("samples", assignment.len().to_string()),
            ("ensemble_size", ecfg.size.to_string()),
            ("resample_fraction", ecfg.resample_fraction.to_string()),
            ("asw", asw_line(&report)),
            ("cdf_area", curve.area.to_string()),
            ("cdf_flatness", curve.flatness.to_string()),
        ],
    )?;
    cfg.write_into(&cfg.output_dir)?;
    println!(
        "consensus over {} (size {}) at k={} -> asw {} ({})",
        cfg.cluster.algorithm,
        ecfg.size,
        assignment.k(),
        asw_line(&report),
        cfg.output_dir.display()
    );
    Ok(())
}

pub fn cmd_select_k(cfg: &PipelineConfig) -> Result<()> {
    let (views, _) = load_views(cfg)?;
    let ks = &cfg.consensus.k_range;
    let ecfg = ensemble_config(cfg, ks.first().copied().unwrap_or(2))?;
    let report = select_k(&views, ks, &ecfg, cfg.consensus.tau)?;

    ensure_dir(&cfg.output_dir)?;
    let ids = views.sample_ids();
    for entry in &report.entries {
        artifacts::write_symmetric(
            &cfg.output_dir.join(format!("k{}_consensus_matrix.csv", entry.k)),
            ids,
            &entry.matrix.values,
        )?;
        artifacts::write_cdf(&cfg.output_dir.join(format!("k{}_cdf.csv", entry.k)), &entry.curve)?;
    }
    artifacts::write_delta_area(&cfg.output_dir.join("delta_area.csv"), &report)?;
    let mut selection = format!("chosen_k: {}\ntau: {}\n", report.chosen_k, report.tau);
    for entry in &report.entries {
        selection.push_str(&format!(
            "k={}: area {} delta_area {} flatness {}\n",
            entry.k, entry.curve.area, entry.delta_area, entry.curve.flatness
        ));
    }
    if report.entries.len() == 1 {
        selection.push_str("warning: only one K searched, no comparison was possible\n");
    }
    std::fs::write(cfg.output_dir.join("selection.txt"), &selection)?;
    cfg.write_into(&cfg.output_dir)?;
    print!("{selection}");
    Ok(())
}

fn per_k_cdf_files(dir: &Path) -> Vec<(usize, PathBuf)> {
    let mut found = Vec::new();
    if let Ok(entries) = std::fs::read_dir(dir) {
        for entry in entries.flatten() {
            let name = entry.file_name().to_string_lossy().into_owned();
            if let Some(k) = name
                .strip_prefix('k')
                .and_then(|rest| rest.strip_suffix("_cdf.csv"))
                .and_then(|digits| digits.parse::<usize>().ok())
            {
                found.push((k, entry.path()));
            }
        }
    }
    found.sort();
    found
}

pub fn cmd_report(cfg: &PipelineConfig, dir: Option<&Path>) -> Result<()> {
    let dir = dir.unwrap_or(&cfg.output_dir);
    let silhouette_path = dir.join("silhouette.csv");
    let ordered_path = dir.join("consensus_ordered.csv");
    let plain_path = dir.join("consensus_matrix.csv");
    let cdf_path = dir.join("cdf.csv");
    let per_k = per_k_cdf_files(dir);

    let mut missing = Vec::new();
    if !silhouette_path.exists() {
        missing.push("silhouette.csv".to_string());
    }
    let heat_path = if ordered_path.exists() {
        Some(ordered_path)
    } else if plain_path.exists() {
        Some(plain_path)
    } else {
        missing.push("consensus_ordered.csv (or consensus_matrix.csv)".to_string());
        None
    };
    if !cdf_path.exists() && per_k.is_empty() {
        missing.push("cdf.csv (or k<K>_cdf.csv)".to_string());
    }
    if !missing.is_empty() {
        return Err(Error::Data(format!(
            "missing artifacts in {}: {}",
            dir.display(),
            missing.join(", ")
        )));
    }

    let (_, heat_values) = artifacts::read_square_csv(&heat_path.unwrap())?;
    std::fs::write(dir.join("heatmap.svg"), svg::heatmap("consensus matrix", &heat_values))?;

    let mut curves = Vec::new();
    if cdf_path.exists() {
        let (grid, cdf) = artifacts::read_cdf_csv(&cdf_path)?;
        curves.push(("consensus".to_string(), grid.into_iter().zip(cdf).collect()));
    }
    for (k, path) in &per_k {
        let (grid, cdf) = artifacts::read_cdf_csv(path)?;
        curves.push((format!("K={k}"), grid.into_iter().zip(cdf).collect()));
    }
    std::fs::write(
        dir.join("cdf.svg"),
        svg::line_plot("consensus CDF", "consensus index", "CDF", &curves),
    )?;

    let rows = artifacts::read_silhouette_csv(&silhouette_path)?;
    let k = rows.iter().map(|(_, c, _)| c + 1).max().unwrap_or(1);
    let mut groups: Vec<(usize, Vec<f64>)> = (0..k).map(|c| (c, Vec::new())).collect();
    for (_, cluster, width) in &rows {
        groups[*cluster].1.push(*width);
    }
    for (_, widths) in &mut groups {
        widths.sort_by(|a, b| b.partial_cmp(a).unwrap());
    }
    std::fs::write(dir.join("silhouette.svg"), svg::silhouette("silhouette widths", &groups))?;

    let asw = rows.iter().map(|(_, _, w)| w).sum::<f64>() / rows.len() as f64;
    let text = format!(
        "samples: {}\nclusters: {}\nasw: {asw}\nfigures: heatmap.svg cdf.svg silhouette.svg\n",
        rows.len(),
        k
    );
    std::fs::write(dir.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}
