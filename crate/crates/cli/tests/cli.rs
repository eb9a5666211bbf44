use std::path::PathBuf;
use std::process::{Command, Output};

use matchpoa::format::serialize_strategies;
use matchpoa::mechanisms::probabilistic_serial;
use matchpoa::rational::format_rational;
use matchpoa::PreferenceProfile;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matchpoa")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("matchpoa-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const THREE: &str = r#"{"n": 3, "normalization": "unit-sum",
 "valuations": [["1/2","1/3","1/6"], ["1/2","1/6","1/3"], ["1/6","1/2","1/3"]]}"#;

#[test]
fn run_prints_exact_ps_matrix_and_times() {
    let dir = scratch("run");
    let inst = dir.join("i.json");
    std::fs::write(&inst, THREE).unwrap();
    let out = bin(&["run", "--mechanism", "ps", "--instance", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();

    let prefs = PreferenceProfile::from_one_based(&[vec![1, 2, 3], vec![1, 3, 2], vec![2, 3, 1]]).unwrap();
    let (p, t) = probabilistic_serial(&prefs);
    let mut expected = String::from("# mechanism: probabilistic-serial\nagent,item_1,item_2,item_3\n");
    for (i, row) in p.rows().iter().enumerate() {
        let cells: Vec<String> = row.iter().map(format_rational).collect();
        expected.push_str(&format!("{},{}\n", i + 1, cells.join(",")));
    }
    expected.push_str("\nitem,exhaustion_time\n");
    for (j, tj) in t.as_slice().iter().enumerate() {
        expected.push_str(&format!("{},{}\n", j + 1, format_rational(tj)));
    }
    assert_eq!(text, expected);
}

#[test]
fn constructed_instance_has_optimum_two() {
    let dir = scratch("opt");
    let inst = dir.join("i.json");
    let out = bin(&["construct", "stability", "--n", "4", "--k", "2", "-o", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = bin(&["opt", "--instance", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let value = text.lines().nth(1).unwrap().split(',').next().unwrap();
    assert_eq!(value, "2");
}

#[test]
fn ps_suite_passes() {
    let out = bin(&["check", "ps-suite", "--count", "100", "--seed", "7", "--nmin", "3", "--nmax", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# seed: 7\ncheck,instances,violations,seed\n"));
    for line in text.lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[2], "0", "{line}");
    }
}

#[test]
fn exit_codes() {
    let dir = scratch("codes");
    let inst = dir.join("i.json");
    std::fs::write(&inst, THREE).unwrap();
    let i = inst.to_str().unwrap();

    // Agent 1 ranks her favourite item last.
    let strat = dir.join("s.json");
    let prefs = PreferenceProfile::from_one_based(&[vec![3, 2, 1], vec![1, 3, 2], vec![2, 3, 1]]).unwrap();
    std::fs::write(&strat, serialize_strategies(&prefs)).unwrap();
    let out = bin(&["nash", "verify", "--instance", i, "--strategies", strat.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("# witness: 1: agent 1 gains"));

    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"n": 2, "normalization": "unit-sum", "valuations": [[0.5, 0.5], ["1", "0"]]}"#).unwrap();
    let out = bin(&["run", "--instance", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("inexact float"));

    let out = bin(&["run", "--instance", dir.join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let five = dir.join("five.json");
    let out = bin(&["construct", "stability", "--n", "5", "-o", five.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = bin(&["nash", "enumerate", "--instance", five.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("best-response dynamics"));

    let out = bin(&["audit", "--mechanism", "ps", "--candidate", "brd", "--max-iters", "0", "stability", "--n", "4"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn audit_reports_certification_scope() {
    let out = bin(&["audit", "--mechanism", "naive", "--format", "text", "deterministic", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("relative to unit-sum value grid with step 1/8 only"));
    assert!(text.contains("outcome: confirmed"));
}

#[test]
fn sweep_emits_plot_data() {
    let out = bin(&["sweep", "--mechanism", "rd", "--family", "stability", "--from", "3", "--to", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "x,welfare,opt,ratio,ratio_approx,predicted,outcome");
    assert_eq!(rows.len(), 4);
}

#[test]
fn output_flag_writes_file() {
    let dir = scratch("out");
    let inst = dir.join("i.json");
    std::fs::write(&inst, THREE).unwrap();
    let csv = dir.join("p.csv");
    let out = bin(&["run", "--mechanism", "rp", "--instance", inst.to_str().unwrap(), "-o", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.contains("agent,item_1,item_2,item_3"));
}
