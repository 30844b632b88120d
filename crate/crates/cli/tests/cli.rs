use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use trajmatch_core::analysis::SimilarityMatrix;

fn trajmatch(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trajmatch"))
        .args(args)
        .current_dir(dir)
        .env_remove("TRAJMATCH_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = trajmatch(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

const SMALL: [&str; 10] = [
    "--problems", "sphere,rastrigin", "--runs", "2", "--pop", "12", "--budget-factor", "60", "--seed", "3",
];

fn generate(dir: &Path, out: &str, extra: &[&str]) {
    let mut args = vec!["generate"];
    args.extend(SMALL);
    args.extend(extra);
    args.extend(["--out", out]);
    ok(dir, &args);
}

fn trajectory_keys(path: &Path) -> BTreeSet<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(4).collect::<Vec<_>>().join(","))
        .collect()
}

fn compare(dir: &Path, input: &str, alpha: &str, stem: &str) -> SimilarityMatrix {
    let matrix = format!("{stem}.csv");
    let series = format!("{stem}_series.csv");
    ok(dir, &["compare", "--in", input, "--alpha", alpha, "--out-matrix", &matrix, "--out-series", &series]);
    SimilarityMatrix::read_csv(fs::File::open(dir.join(matrix)).unwrap()).unwrap()
}

#[test]
fn single_dimension_halves_the_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path(), "both.csv", &["--dims", "2,3"]);
    generate(tmp.path(), "two.csv", &["--dims", "2"]);
    let both = trajectory_keys(&tmp.path().join("both.csv"));
    let two = trajectory_keys(&tmp.path().join("two.csv"));
    assert_eq!(both.len(), 5 * 2 * 2 * 2);
    assert_eq!(two.len() * 2, both.len());
    assert!(two.is_subset(&both));
}

#[test]
fn generation_is_reproducible_and_manifested() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path(), "a.csv", &["--dims", "2"]);
    generate(tmp.path(), "b.json", &["--dims", "2"]);
    generate(tmp.path(), "c.csv", &["--dims", "2", "--threads", "3"]);
    let a = fs::read(tmp.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(tmp.path().join("c.csv")).unwrap());

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "generate");
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["config"]["run"]["budget_factor"], 60);
    assert_eq!(manifest["config"]["n_pop"], 12);
    let digest = manifest["outputs"]["a.csv"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    let other: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("c.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(other["outputs"]["c.csv"], digest);
}

#[test]
fn json_trajectories_compare_like_csv() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path(), "t.csv", &["--dims", "2"]);
    generate(tmp.path(), "t.json", &["--dims", "2"]);
    let from_csv = compare(tmp.path(), "t.csv", "0.05", "m_csv");
    let from_json = compare(tmp.path(), "t.json", "0.05", "m_json");
    assert_eq!(from_csv, from_json);
}

#[test]
fn compare_outputs_symmetric_matrices_monotone_in_alpha() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path(), "t.csv", &["--dims", "2,3"]);
    let strict = compare(tmp.path(), "t.csv", "0.01", "strict");
    let loose = compare(tmp.path(), "t.csv", "0.05", "loose");
    let n = strict.len();
    assert_eq!(n, 5);
    for i in 0..n {
        assert_eq!(strict.entries()[i][i], 1.0);
        for j in 0..n {
            assert_eq!(strict.entries()[i][j], strict.entries()[j][i]);
            assert!(strict.entries()[i][j] >= loose.entries()[i][j]);
        }
    }
    for dim in [2, 3] {
        assert!(tmp.path().join(format!("loose.d{dim}.csv")).exists());
    }
    let series = fs::read_to_string(tmp.path().join("loose_series.csv")).unwrap();
    assert!(series.starts_with("algorithm_a,algorithm_b,problem,dim,run,iteration,a1,p_value,rejected\n"));
    let manifest = fs::read_to_string(tmp.path().join("loose_series.csv.manifest.json")).unwrap();
    assert!(manifest.contains("\"loose.d3.csv\""));
}

#[test]
fn malformed_and_missing_inputs_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.csv"), "algorithm,problem\nx,y\n").unwrap();
    let out = trajmatch(tmp.path(), &["compare", "--in", "bad.csv", "--out-matrix", "m.csv", "--out-series", "s.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let out = trajmatch(tmp.path(), &["cluster", "--in", "absent.csv", "--out", "tree.nwk"]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(tmp.path().join("m.csv"), "algorithm,a,b\na,1,0.5\nb,0.4,1\n").unwrap();
    let out = trajmatch(tmp.path(), &["cluster", "--in", "m.csv", "--out", "tree.nwk"]);
    assert_eq!(out.status.code(), Some(2));

    let out = trajmatch(tmp.path(), &["generate", "--algorithms", "hill_climber", "--out", "t.csv"]);
    assert_eq!(out.status.code(), Some(2));

    let out = trajmatch(tmp.path(), &["compare", "--in", "t.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_count_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_trajmatch"))
        .args(["generate", "--dims", "2", "--out", "t.csv"])
        .args(SMALL)
        .env("TRAJMATCH_THREADS", "2")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let manifest = fs::read_to_string(tmp.path().join("t.csv.manifest.json")).unwrap();
    assert!(manifest.contains("\"threads\": 2"));

    let out = Command::new(env!("CARGO_BIN_EXE_trajmatch"))
        .args(["generate", "--out", "t.csv"])
        .env("TRAJMATCH_THREADS", "many")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cluster_formats() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("m.csv"),
        "algorithm,a,b,c\na,1,0.9,0.1\nb,0.9,1,0.2\nc,0.1,0.2,1\n",
    )
    .unwrap();
    for (format, out) in [("newick", "t.nwk"), ("json", "t.json"), ("svg", "t.svg")] {
        ok(tmp.path(), &["cluster", "--in", "m.csv", "--format", format, "--out", out]);
        assert!(tmp.path().join(format!("{out}.manifest.json")).exists());
    }
    let newick = fs::read_to_string(tmp.path().join("t.nwk")).unwrap();
    assert!(newick.starts_with("(c:") && newick.trim_end().ends_with(");"));
    let a_len: f64 = newick.split("(a:").nth(1).and_then(|r| r.split(',').next()).unwrap().parse().unwrap();
    assert!((a_len - 0.1).abs() < 1e-12, "{newick}");
    assert_eq!(newick.matches('(').count(), newick.matches(')').count());
    let svg = fs::read_to_string(tmp.path().join("t.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<text"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(json["merges"].as_array().unwrap().len(), 2);
}

#[test]
fn report_ranks_pairs_and_links_series() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path(), "t.csv", &["--dims", "2"]);
    compare(tmp.path(), "t.csv", "0.05", "m");
    ok(tmp.path(), &["report", "--matrix", "m.csv", "--series", "m_series.csv", "--top-k", "4", "--out", "r.md"]);
    let text = fs::read_to_string(tmp.path().join("r.md")).unwrap();

    let matrix = SimilarityMatrix::read_csv(fs::File::open(tmp.path().join("m.csv")).unwrap()).unwrap();
    let ranked = matrix.ranked_pairs();
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("| 1 ") || l.starts_with("| 2 ")
        || l.starts_with("| 3 ") || l.starts_with("| 4 ")).collect();
    assert_eq!(rows.len(), 4);
    for (row, (a, b, _)) in rows.iter().zip(&ranked) {
        assert!(row.contains(&format!("| {a} | {b} |")), "{row}");
    }
    for (a, b, _) in ranked.iter().take(4) {
        let name = format!("r_series/{a}__{b}.csv");
        assert!(text.contains(&name));
        let extract = fs::read_to_string(tmp.path().join(&name)).unwrap();
        assert!(extract.lines().skip(1).all(|l| l.starts_with(&format!("{a},{b},"))));
        assert!(extract.lines().count() > 1);
    }
    assert!(text.contains("Supplementary"));

    ok(tmp.path(), &["report", "--matrix", "m.csv", "--series", "m_series.csv", "--top-k", "4", "--out", "again.md"]);
    let again = fs::read_to_string(tmp.path().join("again.md")).unwrap();
    assert_eq!(again.replace("again_series", "r_series"), text);
}

#[test]
fn report_breaks_ties_by_id() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("m.csv"),
        "algorithm,z,b,a\nz,1,0.5,0.5\nb,0.5,1,0.5\na,0.5,0.5,1\n",
    )
    .unwrap();
    ok(tmp.path(), &["report", "--matrix", "m.csv", "--out", "r.md"]);
    let text = fs::read_to_string(tmp.path().join("r.md")).unwrap();
    let a_b = text.find("| a | b |").unwrap();
    let a_z = text.find("| a | z |").unwrap();
    let b_z = text.find("| b | z |").unwrap();
    assert!(a_b < a_z && a_z < b_z);
}

#[test]
fn crossmatch_on_point_files() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("x.csv"), "u,v\n0,0\n0,0.1\n").unwrap();
    fs::write(tmp.path().join("y.csv"), "u,v\n5,5\n5,5.1\n").unwrap();
    let out = trajmatch(tmp.path(), &["crossmatch", "--x", "x.csv", "--y", "y.csv"]);
    assert!(out.status.success());
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["a1"], 0);
    assert!((r["p_value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);

    fs::write(tmp.path().join("odd.csv"), "u,v\n1,1\n").unwrap();
    let out = trajmatch(tmp.path(), &["crossmatch", "--x", "x.csv", "--y", "odd.csv"]);
    assert_eq!(out.status.code(), Some(2));
}
