//! End-to-end runs of the `cce` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cce::cli::{ResultDocument, VerifyDocument};
use cce::evolution::StopReason;
use tempfile::TempDir;

const FIG1_CSV: &str = "1.0000,0.7245,0.2852,0.1832
0.7245,1.0000,0.6547,0.4585
0.2852,0.6547,1.0000,0.2453
0.1832,0.4585,0.2453,1.0000
";

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn cce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cce")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn cluster_doc(args: &[&str]) -> ResultDocument {
    let out = cce(args);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    ResultDocument::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap()
}

#[test]
fn fig1_matrix_cluster_document() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "fig1.csv", FIG1_CSV);
    let doc = cluster_doc(&[
        "cluster", "--input", path(&input), "--format", "matrix", "--min-platform", "1", "--noise-threshold", "0",
    ]);
    assert_eq!(doc.trace.n_clusters_raw, vec![4, 2, 1]);
    assert_eq!(doc.trace.stop_reason, StopReason::CollapsedToOne);
    assert_eq!(doc.skipped, vec![3]);
    let platforms: Vec<_> = doc.platforms.iter().map(|p| (p.k_start, p.k_end, p.count)).collect();
    assert_eq!(platforms, vec![(1, 1, 4), (2, 2, 2), (3, 3, 1)]);
    assert_eq!(doc.suggestions.len(), 2);
    assert_eq!(doc.snapshots[1].centers, vec![1, 3]);
    assert_eq!(doc.snapshots[1].labels, vec![1, 1, 1, 3]);
}

#[test]
fn result_document_round_trips_through_a_file() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "fig1.csv", FIG1_CSV);
    let output = dir.path().join("result.json");
    let trace_out = dir.path().join("trace.csv");
    let out = cce(&[
        "cluster", "--input", path(&input), "--format", "matrix", "--detail", "all", "--output", path(&output),
        "--trace-output", path(&trace_out),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&output).unwrap();
    let doc = ResultDocument::from_json(&text).unwrap();
    let again = ResultDocument::from_json(&doc.to_json()).unwrap();
    assert_eq!(doc, again);
    assert_eq!(doc.snapshots.len(), 3);
    assert_eq!(doc.snapshots[1].noise, vec![3]);
    assert_eq!(doc.snapshots[1].n_clusters_filtered, 1);
    assert!(fs::read_to_string(trace_out).unwrap().starts_with("k,n_clusters_raw,n_clusters_filtered\n"));
}

#[test]
fn fig1_trace_csv() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "fig1.csv", FIG1_CSV);
    let out = cce(&["trace", "--input", path(&input), "--format", "matrix", "--noise-threshold", "0"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "k,n_clusters_raw,n_clusters_filtered\n1,4,4\n2,2,2\n3,1,1\n");

    // threshold 2: k=1 is all singletons, k=2 keeps {1,2,3}, k=3 keeps everything
    let out = cce(&["trace", "--input", path(&input), "--format", "matrix"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "k,n_clusters_raw,n_clusters_filtered\n1,4,0\n2,2,1\n3,1,1\n");
}

#[test]
fn identity_trace_runs_to_k_max() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "id.csv", "1,0,0\n0,1,0\n0,0,1\n");
    let out = cce(&["trace", "--input", path(&input), "--format", "matrix", "--k-max", "3", "--noise-threshold", "0"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "k,n_clusters_raw,n_clusters_filtered\n1,3,3\n2,3,3\n3,3,3\n");
}

#[test]
fn empty_input_fails_with_location() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "empty.csv", "");
    let out = cce(&["cluster", "--input", path(&input), "--format", "matrix"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("empty.csv:1"), "{err}");
}

#[test]
fn invalid_matrix_names_line() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bad.csv", "1,0.5\n0.4,1\n");
    let out = cce(&["cluster", "--input", path(&input), "--format", "matrix"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.csv:1") && err.contains("asymmetric"), "{err}");
}

#[test]
fn single_route_hubs() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "routes.txt", "# one line\nA,B,C\n");
    let doc = cluster_doc(&["cluster", "--input", path(&input), "--format", "routes"]);
    assert_eq!(doc.matrix.labels, vec!["A", "B", "C"]);
    assert_eq!(doc.matrix.diagonal, vec![3.0, 2.0, 3.0]);
}

#[test]
fn points_need_sigma_and_accept_auto() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "pts.csv", "name,x,y\na,0,0\nb,0.1,0\nc,5,5\nd,5.1,5\n");
    let out = cce(&["cluster", "--input", path(&input), "--format", "points", "--id-column"]);
    assert!(!out.status.success());

    let doc = cluster_doc(&[
        "cluster", "--input", path(&input), "--format", "points", "--id-column", "--sigma", "auto", "--normalize", "njw",
    ]);
    assert_eq!(doc.matrix.labels, vec!["a", "b", "c", "d"]);
    assert!(doc.sigma_used.unwrap() > 0.0);

    let doc = cluster_doc(&["cluster", "--input", path(&input), "--format", "points", "--id-column", "--sigma", "1"]);
    assert_eq!(doc.sigma_used, Some(1.0));
    assert_eq!(doc.trace.n_clusters_raw[0], 4);
}

fn verify(input: &Path, k: &str) -> VerifyDocument {
    let out = cce(&["verify", "--input", path(input), "--format", "matrix", "--k", k]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn verify_reports() {
    let dir = TempDir::new().unwrap();
    let fig1 = write(&dir, "fig1.csv", FIG1_CSV);
    let doc = verify(&fig1, "64");
    assert!(doc.report.max_ratio_deviation.unwrap() < 1e-6);
    assert_eq!(doc.status, "convergent");

    let id = write(&dir, "id.csv", "1,0,0\n0,1,0\n0,0,1\n");
    assert_eq!(verify(&id, "5").report.max_ratio_deviation, Some(0.0));

    let blocks = write(&dir, "blocks.csv", "1,0.5,0,0\n0.5,1,0,0\n0,0,1,0.5\n0,0,0.5,1\n");
    let doc = verify(&blocks, "64");
    assert_eq!(doc.status, "non-convergent: dominant eigenvalue not simple");
}
