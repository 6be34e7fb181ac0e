//! End-to-end tests driving the `omiclust` binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_omiclust"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("failed to spawn omiclust")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "command failed: {}\n{}",
        String::from_utf8_lossy(&out.stderr),
        String::from_utf8_lossy(&out.stdout)
    );
}

fn write_synth_config(dir: &Path) {
    std::fs::write(
        dir.join("synth.toml"),
        "seed = 11\noutput_dir = \"data\"\n\n[synth]\nk = 3\nn_per_cluster = 15\ndims = 6\nseparation = 8.0\nviews = 2\nnoise_views = 0\n",
    )
    .unwrap();
}

fn write_run_config(dir: &Path) {
    std::fs::write(
        dir.join("run.toml"),
        "seed = 11\n\n[[view]]\npath = \"data/view0.tsv\"\n\n[[view]]\npath = \"data/view1.tsv\"\n\n[cluster]\nalgorithm = \"kmeans\"\nk = 3\n\n[consensus]\nensemble_size = 25\n",
    )
    .unwrap();
}

fn synth_data(dir: &Path) {
    assert_success(&run_in(dir, &["synth", "--config", "synth.toml"]));
}

#[test]
fn synth_then_cluster_recovers_planted_labels() {
    let tmp = tempfile::tempdir().unwrap();
    write_synth_config(tmp.path());
    write_run_config(tmp.path());
    synth_data(tmp.path());
    assert_success(&run_in(
        tmp.path(),
        &["cluster", "--config", "run.toml", "--output-dir", "km"],
    ));
    let planted = std::fs::read_to_string(tmp.path().join("data/labels.csv")).unwrap();
    let found = std::fs::read_to_string(tmp.path().join("km/assignment.csv")).unwrap();
    // Separation 8 leaves no ambiguity, and canonical labelling makes the
    // files comparable directly.
    assert_eq!(planted, found);
    for artifact in ["silhouette.csv", "summary.txt", "config.toml", "kmeans_centers.csv"] {
        assert!(tmp.path().join("km").join(artifact).exists(), "missing {artifact}");
    }
}

#[test]
fn preprocess_then_cluster_matches_direct_run() {
    let tmp = tempfile::tempdir().unwrap();
    write_synth_config(tmp.path());
    write_run_config(tmp.path());
    synth_data(tmp.path());
    assert_success(&run_in(
        tmp.path(),
        &["preprocess", "--config", "run.toml", "--output-dir", "prep"],
    ));
    std::fs::write(
        tmp.path().join("prep.toml"),
        "seed = 11\n\n[[view]]\npath = \"prep/merged_view0.tsv\"\n\n[[view]]\npath = \"prep/merged_view1.tsv\"\n\n[cluster]\nalgorithm = \"kmeans\"\nk = 3\n",
    )
    .unwrap();
    assert_success(&run_in(
        tmp.path(),
        &["cluster", "--config", "run.toml", "--output-dir", "direct"],
    ));
    assert_success(&run_in(
        tmp.path(),
        &["cluster", "--config", "prep.toml", "--output-dir", "staged"],
    ));
    let direct = std::fs::read(tmp.path().join("direct/assignment.csv")).unwrap();
    let staged = std::fs::read(tmp.path().join("staged/assignment.csv")).unwrap();
    assert_eq!(direct, staged);
}

#[test]
fn consensus_is_deterministic_and_reportable() {
    let tmp = tempfile::tempdir().unwrap();
    write_synth_config(tmp.path());
    write_run_config(tmp.path());
    synth_data(tmp.path());
    for dir in ["a", "b"] {
        assert_success(&run_in(
            tmp.path(),
            &["consensus", "--config", "run.toml", "--output-dir", dir],
        ));
    }
    for artifact in [
        "assignment.csv",
        "silhouette.csv",
        "consensus_matrix.csv",
        "consensus_ordered.csv",
        "cdf.csv",
    ] {
        let a = std::fs::read(tmp.path().join("a").join(artifact)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(artifact)).unwrap();
        assert_eq!(a, b, "{artifact} differs between identical runs");
    }
    assert_success(&run_in(tmp.path(), &["report", "a"]));
    for figure in ["heatmap.svg", "cdf.svg", "silhouette.svg", "report.txt"] {
        assert!(tmp.path().join("a").join(figure).exists(), "missing {figure}");
    }
}

#[test]
fn select_k_finds_planted_k() {
    let tmp = tempfile::tempdir().unwrap();
    write_synth_config(tmp.path());
    write_run_config(tmp.path());
    synth_data(tmp.path());
    let out = run_in(
        tmp.path(),
        &[
            "select-k",
            "--config",
            "run.toml",
            "--algorithm",
            "hier",
            "--k-range",
            "2..5",
            "--output-dir",
            "sel",
        ],
    );
    assert_success(&out);
    let selection = std::fs::read_to_string(tmp.path().join("sel/selection.txt")).unwrap();
    assert!(selection.contains("chosen_k: 3"), "selection:\n{selection}");
    assert!(tmp.path().join("sel/delta_area.csv").exists());
    assert!(tmp.path().join("sel/k3_cdf.csv").exists());
}

#[test]
fn exit_codes_follow_error_class() {
    let tmp = tempfile::tempdir().unwrap();
    write_synth_config(tmp.path());
    write_run_config(tmp.path());
    synth_data(tmp.path());

    // Usage / config errors exit 1.
    let out = run_in(tmp.path(), &["cluster", "--config", "run.toml", "--algorithm", "dbscan"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run_in(tmp.path(), &["cluster", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));

    // Data errors exit 2.
    std::fs::write(tmp.path().join("bad.tsv"), "feature_id\tS1\tS2\nf1\t1.0\toops\n").unwrap();
    std::fs::write(
        tmp.path().join("bad.toml"),
        "[[view]]\npath = \"bad.tsv\"\n\n[cluster]\nk = 2\n",
    )
    .unwrap();
    let out = run_in(tmp.path(), &["cluster", "--config", "bad.toml", "--output-dir", "badout"]);
    assert_eq!(out.status.code(), Some(2));

    // Report on an empty directory exits 2 and lists what is missing.
    std::fs::create_dir(tmp.path().join("empty")).unwrap();
    let out = run_in(tmp.path(), &["report", "empty"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("silhouette.csv"), "stderr: {stderr}");
    assert!(stderr.contains("cdf.csv"), "stderr: {stderr}");
}

#[test]
fn synth_same_seed_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    write_synth_config(tmp.path());
    synth_data(tmp.path());
    let first = std::fs::read(tmp.path().join("data/view0.tsv")).unwrap();
    assert_success(&run_in(tmp.path(), &["synth", "--config", "synth.toml"]));
    let second = std::fs::read(tmp.path().join("data/view0.tsv")).unwrap();
    assert_eq!(first, second);
}
