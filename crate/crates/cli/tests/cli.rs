use std::process::{Command, Output};

fn qdsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdsim")).args(args).env_remove("QDSIM_LOG").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("qdsim-cli-{}-{name}", std::process::id()))
}

#[test]
fn braid_demo_writes_versioned_json_and_csv() {
    let (json, csv) = (temp_path("braid.json"), temp_path("braid.csv"));
    let o = qdsim(&["demo", "braid", "--ground-prep", "--exact", "--json", json.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["qudits"], 4);
    assert_eq!(v["outcome_distribution"]["|2>"], 1.0);
    assert_eq!(v["inferred_state"], "|1_R2>");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.contains("|2>,1"));
    let _ = std::fs::remove_file(json);
    let _ = std::fs::remove_file(csv);
}

#[test]
fn sampled_fuse_demo_is_seeded() {
    let a = qdsim(&["demo", "fuse", "--shots", "100", "--seed", "9"]);
    let b = qdsim(&["demo", "fuse", "--shots", "100", "--seed", "9"]);
    assert!(a.status.success());
    let strip = |s: String| s.lines().filter(|l| !l.starts_with("wall time")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(stdout(&a)), strip(stdout(&b)));
    assert!(stdout(&a).contains("6 qudits"));
}

#[test]
fn vacuum_pair_scenario_fuses_to_vacuum() {
    let o = qdsim(&["demo", "fuse", "--scenario", "vacuum-pair", "--ground-prep", "--check-reduction"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("vacuum after fusion"), "{out}");
    assert!(out.contains("duplicated qudits identical: true"));
}

#[test]
fn verify_group_exits_zero() {
    let o = qdsim(&["verify", "group"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("group: 33 checks, 0 failed"));
}

#[test]
fn lattice_show_lists_edges() {
    let o = qdsim(&["lattice", "show", "braid-min-reduced"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("edges (3):"));
    let o = qdsim(&["lattice", "show", "patch-2x1", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["edges"].as_array().unwrap().len(), 7);
}

#[test]
fn bad_input_fails() {
    assert!(!qdsim(&["demo", "braid", "--scenario", "vacuum-pair"]).status.success());
    assert!(!qdsim(&["lattice", "show", "nowhere"]).status.success());
    assert!(!qdsim(&["demo", "braid", "--shots", "5", "--exact"]).status.success());
}

#[test]
fn log_level_comes_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_qdsim"))
        .args(["demo", "braid", "--ground-prep"])
        .env("QDSIM_LOG", "debug")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("DEBUG"));
}
