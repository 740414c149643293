use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use refuel_core::io::{SolutionDoc, CSV_HEADER};

fn refuel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_refuel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn example_file() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/example.json")
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip_while(|l| *l != CSV_HEADER)
        .skip(1)
        .filter(|l| l.contains(','))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> Option<f64> {
    s.parse().ok()
}

#[test]
fn solve_example_with_both_formulations() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["cf", "pf"] {
        let out = dir.path().join(f);
        let o = refuel(&[
            "solve",
            "--instance",
            example_file().to_str().unwrap(),
            "--formulation",
            f,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        assert!(text.contains("status: optimal"), "{text}");
        let row = &csv_rows(&text)[0];
        assert_eq!(row[0], f);
        assert_eq!(row[4], "1");
        assert_eq!(row[6], "0.00");
        let doc: SolutionDoc = serde_json::from_str(&fs::read_to_string(out.join("solution.json")).unwrap()).unwrap();
        assert_eq!(doc.objective, 1.0);
        assert_eq!(doc.routes["0"].first(), Some(&0));
        assert_eq!(doc.routes["0"].last(), Some(&5));
        let csv = fs::read_to_string(out.join("results.csv")).unwrap();
        assert_eq!(csv_rows(&csv), vec![row.clone()]);
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = refuel(&["solve", "--instance", example_file().to_str().unwrap(), "--bogus"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--bogus"));
}

#[test]
fn missing_or_malformed_instance_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = refuel(&["solve", "--instance", dir.path().join("none.json").to_str().unwrap()]);
    assert!(!o.status.success());
    let bad = dir.path().join("bad.json");
    let text = fs::read_to_string(example_file())
        .unwrap()
        .replace(r#""s": 0"#, r#""s": 1"#);
    fs::write(&bad, text).unwrap();
    let o = refuel(&["solve", "--instance", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("od_pairs[0].s"));
}

#[test]
fn node_limit_reports_limit_with_positive_gap() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = refuel(&[
        "generate",
        "--seed",
        "2",
        "--stations",
        "30",
        "--terminals",
        "12",
        "--pairs",
        "25",
        "--r-max",
        "50",
        "--lambda",
        "0.5",
        "--out",
        d,
    ]);
    assert!(o.status.success());
    let inst = dir.path().join("instance_seed2.json");
    let o = refuel(&[
        "solve",
        "--instance",
        inst.to_str().unwrap(),
        "--formulation",
        "pf",
        "--kappa",
        "2",
        "--node-limit",
        "1",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("status: limit"), "{text}");
    let gap = num(&csv_rows(&text)[0][6]).expect("gap reported");
    assert!(gap > 0.0);
}

#[test]
fn generate_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = refuel(&["generate", "--seed", "11", "--out", d.path().to_str().unwrap()]);
        assert!(o.status.success());
    }
    let read = |d: &tempfile::TempDir| fs::read_to_string(d.path().join("instance_seed11.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn bench_grid_properties() {
    let dir = tempfile::tempdir().unwrap();
    let o = refuel(&[
        "bench",
        "--stations",
        "10",
        "--terminals",
        "6",
        "--lambda",
        "0.1,0.3",
        "--kappa",
        "1,2,3,inf",
        "--seed",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&fs::read_to_string(dir.path().join("results.csv")).unwrap());
    assert_eq!(rows.len(), 2 * 4 * 2);
    let obj = |r: &Vec<String>| num(&r[4]).unwrap_or(f64::INFINITY);
    for r in &rows {
        if let Some(u) = num(&r[7]) {
            assert!(u <= 100.0 + 1e-9, "{r:?}");
        }
    }
    for lambda_block in rows.chunks(8) {
        for f in 0..2 {
            let series: Vec<f64> = lambda_block.iter().skip(f).step_by(2).map(obj).collect();
            assert!(series.windows(2).all(|w| w[1] <= w[0]), "{series:?}");
        }
        for pair in lambda_block.chunks(2) {
            if pair[0][6] == "0.00" && pair[1][6] == "0.00" {
                assert_eq!(pair[0][4], pair[1][4]);
            }
        }
    }
    for metric in ["objective", "time", "gap", "utilization"] {
        let tsv = fs::read_to_string(dir.path().join(format!("{metric}.tsv"))).unwrap();
        assert_eq!(tsv.lines().next(), Some("lambda\tkappa\tcf\tpf"));
        assert_eq!(tsv.lines().count(), 1 + 8);
    }
}

#[test]
fn compare_separation_objectives_agree() {
    let dir = tempfile::tempdir().unwrap();
    let o = refuel(&[
        "compare-separation",
        "--stations",
        "30",
        "--terminals",
        "10",
        "--pairs",
        "15",
        "--r-max",
        "50",
        "--lambda",
        "0.2",
        "--count",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("equal objectives: 3/3"), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("separation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6);
}
