use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_asuman-sim"));
    cmd.env_remove("ASUMAN_SIM_JOBS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn small_complete(dir: &TempDir, n: usize, policy: &str) -> PathBuf {
    write(
        dir,
        &format!("{policy}_{n}.json"),
        &format!(
            r#"{{"topology": {{"kind": "complete", "n": {n}}},
                "policy": {{"kind": "{policy}"}},
                "run": {{"epochs": 1500, "replications": 4, "seed": 9}}}}"#
        ),
    )
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_csv_with_network_row() {
    let dir = TempDir::new().unwrap();
    let scenario = small_complete(&dir, 100, "asuman");
    let out = dir.path().join("out.csv");
    let o = run(&[
        "simulate",
        "--scenario",
        path(&scenario),
        "--out",
        path(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("n,policy,node_id,mean_age,stderr,replications,seed")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 101);
    let network = rows.last().unwrap();
    assert_eq!(network[2], "network");
    let mean: f64 = network[3].parse().unwrap();
    assert!(mean < 3.0, "{mean}");
    assert_eq!(network[5], "4");
}

#[test]
fn csv_is_byte_stable_and_independent_of_jobs() {
    let dir = TempDir::new().unwrap();
    let scenario = small_complete(&dir, 30, "uniform");
    let once = run(&["simulate", "--scenario", path(&scenario), "--jobs", "1"]);
    let again = bin()
        .args(["simulate", "--scenario", path(&scenario)])
        .env("ASUMAN_SIM_JOBS", "3")
        .output()
        .unwrap();
    assert_eq!(once.status.code(), Some(0));
    assert_eq!(once.stdout, again.stdout);
    let reseeded = run(&["simulate", "--scenario", path(&scenario), "--seed", "10"]);
    assert_ne!(once.stdout, reseeded.stdout);
}

#[test]
fn single_node_scenario_matches_oracle() {
    let dir = TempDir::new().unwrap();
    let scenario = write(
        &dir,
        "one.json",
        r#"{"topology": {"kind": "complete", "n": 1}, "policy": {"kind": "asuman"},
            "run": {"epochs": 20000, "replications": 8, "seed": 2}}"#,
    );
    let o = run(&[
        "simulate",
        "--scenario",
        path(&scenario),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let mean = v["network"]["mean"].as_f64().unwrap();
    let se = v["network"]["stderr"].as_f64().unwrap();
    assert!((mean - 1.0).abs() <= 3.0 * se, "{mean} ± {se}");
}

#[test]
fn config_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad_json = write(&dir, "bad.json", "{ not json");
    assert_eq!(
        run(&["simulate", "--scenario", path(&bad_json)])
            .status
            .code(),
        Some(1)
    );
    let unknown_key = write(
        &dir,
        "key.json",
        r#"{"topology": {"kind": "complete", "n": 5, "colour": 1}, "policy": {"kind": "asuman"}}"#,
    );
    assert_eq!(
        run(&["simulate", "--scenario", path(&unknown_key)])
            .status
            .code(),
        Some(1)
    );
    let bad_q = write(
        &dir,
        "q.json",
        r#"{"topology": {"kind": "partial", "n": 5, "q": 2.0}, "policy": {"kind": "asuman"}}"#,
    );
    let o = run(&["simulate", "--scenario", path(&bad_q)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    assert_eq!(
        run(&["simulate", "--scenario", path(&bad_q), "--format", "yaml"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn io_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let scenario = small_complete(&dir, 5, "asuman");
    assert_eq!(
        run(&["simulate", "--scenario", "/no/such/file.json"])
            .status
            .code(),
        Some(2)
    );
    let o = run(&[
        "simulate",
        "--scenario",
        path(&scenario),
        "--out",
        "/no/such/dir/out.csv",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_blocks_are_ordered_and_validated() {
    let dir = TempDir::new().unwrap();
    let scenario = small_complete(&dir, 10, "asuman");
    let o = run(&[
        "sweep",
        "--scenario",
        path(&scenario),
        "--sweep",
        "n=20,10",
        "--gnuplot-header",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with('#'));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        data[0],
        "param,value,n,policy,node_id,mean_age,stderr,replications,seed"
    );
    let networks: Vec<&str> = data
        .iter()
        .copied()
        .filter(|l| l.contains(",network,"))
        .collect();
    assert_eq!(networks.len(), 2);
    assert!(networks[0].starts_with("n,10,10,") && networks[1].starts_with("n,20,20,"));

    assert_eq!(
        run(&[
            "sweep",
            "--scenario",
            path(&scenario),
            "--sweep",
            "zeta=1,2"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        run(&["sweep", "--scenario", path(&scenario), "--sweep", "n="])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn bounds_table() {
    let o = run(&[
        "bounds",
        "--all",
        "--lambda-e",
        "1",
        "--lambda",
        "1",
        "--n",
        "100",
        "--q",
        "0.5",
        "--c",
        "10",
        "--p",
        "0.5",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    let value = |name: &str| -> f64 {
        let line = csv
            .lines()
            .find(|l| l.starts_with(&format!("{name},")))
            .unwrap();
        line.rsplit(',').next().unwrap().parse().unwrap()
    };
    assert_eq!(value("asuman-limit"), 3.0);
    assert_eq!(value("partial-ub"), 11.0);
    assert_eq!(value("cluster-optimum"), 8.0);
    assert_eq!(value("disconnected-cluster-ub"), 13.0);

    let o = run(&[
        "bounds",
        "asuman-limit",
        "--lambda-e",
        "2",
        "--lambda",
        "1",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["value"].as_f64(), Some(5.0));

    assert_eq!(
        run(&["bounds", "asuman-limit", "--lambda", "1"])
            .status
            .code(),
        Some(1)
    );
    let o = run(&[
        "bounds",
        "partial-ub",
        "--lambda-e",
        "1",
        "--lambda",
        "1",
        "--q",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("q"));
}
