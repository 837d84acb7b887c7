use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn contagion(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contagion"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .env_remove("CONTAGION_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn critical_degree_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = contagion(dir.path(), &["critical-degree", "--R", "1.02", "--r", "1.01", "--f", "0.5", "--lambda", "0.03"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "k1_star=10.22 k2_star=2.74");
    assert!(dir.path().join("run_summary.json").exists());
}

#[test]
fn percent_ratios_match_decimals() {
    let dir = tempfile::tempdir().unwrap();
    let a = contagion(dir.path(), &["critical-degree", "--f", "50%", "--lambda", "3%"]);
    let b = contagion(dir.path(), &["critical-degree"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn critical_degree_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = contagion(dir.path(), &["critical-degree", "--grid", "f-lambda", "--steps", "5", "--R", "1.05"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("critical_degree.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# contagion"));
    assert_eq!(lines[1], "f,lambda,R,r,k1_star,k2_star");
    assert_eq!(lines.len(), 2 + 25);
}

#[test]
fn tree_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = contagion(
        dir.path(),
        &["tree", "--k", "4", "--depth", "3", "--R", "1.02", "--r", "1.01", "--f", "0.5", "--lambda", "0.03"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("F=4 "));
    let table = fs::read_to_string(dir.path().join("tree.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 4);
}

#[test]
fn sweep_example_has_ten_rows_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["sweep", "--family", "er", "--n", "200", "--z", "2:20:2", "--replicates", "1000", "--seed", "7"];
    let oa = contagion(a.path(), &args);
    assert!(oa.status.success(), "{}", stderr(&oa));
    let mut args_b = args.to_vec();
    args_b.extend(["--threads", "1"]);
    let ob = contagion(b.path(), &args_b);
    assert!(ob.status.success(), "{}", stderr(&ob));
    let sa = fs::read(a.path().join("sweep.csv")).unwrap();
    let sb = fs::read(b.path().join("sweep.csv")).unwrap();
    assert_eq!(sa, sb);
    let text = String::from_utf8(sa).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "z,F_mean_emp,F_sem,F_mean_mf,k1_star");
    assert_eq!(rows.len(), 11);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("run_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["master_seed"], 7);
    assert_eq!(summary["subcommand"], "sweep");
    let artifacts = summary["artifacts"].as_array().unwrap();
    assert!(artifacts.iter().any(|a| a == "sweep.csv"));
    assert!(artifacts.iter().any(|a| a == "run_summary.json"));
}

#[test]
fn seed_from_environment() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let run = |dir: &Path, seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_contagion"));
        c.arg("--out-dir").arg(dir).args(["sweep", "--z", "8", "--replicates", "50", "--n", "80"]);
        match seed {
            Some(s) => c.env("CONTAGION_SEED", s),
            None => c.env_remove("CONTAGION_SEED"),
        };
        assert!(c.output().unwrap().status.success());
        fs::read(dir.join("sweep.csv")).unwrap()
    };
    assert_ne!(run(a.path(), Some("99")), run(b.path(), None));
    assert_eq!(run(a.path(), Some("7")), run(b.path(), None));
}

#[test]
fn hist_files_per_z() {
    let dir = tempfile::tempdir().unwrap();
    let o = contagion(dir.path(), &["hist", "--family", "ba", "--n", "100", "--z", "4,8", "--replicates", "100", "--f-max", "30"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for z in ["4", "8"] {
        let text = fs::read_to_string(dir.path().join(format!("hist_z{z}.csv"))).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], "F,count,p_emp,p_mf,log10_p_emp,log10_p_mf");
        assert_eq!(rows.len(), 1 + 31 + 1);
        assert!(rows.last().unwrap().starts_with(">30,"));
        let total: u64 = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
        assert_eq!(total, 100);
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        r#"family = "er"
n = 60
z_values = [4.0, 6.0, 8.0]
replicates = 20
shock_rule = "degree-weighted"
master_seed = 3
directed = false
reciprocity = 1.0
depth = 3
f_max = 50

[params]
R = 1.02
r = 1.01
f = "50%"
lambda = "3%"
"#,
    )
    .unwrap();
    let o = contagion(dir.path(), &["sweep", "--config", cfg.to_str().unwrap(), "--replicates", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["replicates"], 10);
    assert_eq!(summary["config"]["shock_rule"], "degree-weighted");
    assert_eq!(summary["config"]["params"]["f"], 0.5);
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn generate_then_simulate_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let o = contagion(dir.path(), &["generate", "--family", "ba", "--n", "40", "--z", "4", "--seed", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let graph = dir.path().join("graph.edges");
    let sheets = dir.path().join("sheets.txt");
    fs::write(&sheets, "# id liquid illiquid senior rate\n3 10 0 0 1.02\n").unwrap();
    let o = contagion(
        dir.path(),
        &["simulate", "--graph", graph.to_str().unwrap(), "--sheets", sheets.to_str().unwrap(), "--shock", "0"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("shocked=0 F="));
    let table = fs::read_to_string(dir.path().join("clearing.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "bank_id,degree,x,K_prime,status");
    assert_eq!(table.lines().count(), 41);
    assert!(table.lines().nth(1).unwrap().ends_with(",shocked"));
}

#[test]
fn mf_predict_outputs_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let o = contagion(dir.path(), &["mf-predict", "--family", "er", "--z", "8", "--f-max", "40"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("F_mean_mf=5.73"));
    let text = fs::read_to_string(dir.path().join("mf_predict.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 41);
}

#[test]
fn invalid_input_exits_two_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["critical-degree", "--f", "1.2"],
        vec!["critical-degree", "--bogus"],
        vec!["simulate", "--graph", "/definitely/missing.edges"],
        vec!["sweep", "--family", "ba", "--z", "5"],
        vec!["sweep", "--replicates", "0"],
        vec!["critical-degree", "--lambda", "abc"],
    ] {
        let o = contagion(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = stderr(&o);
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("contagion: error:"), "{err}");
    }
}

#[test]
fn malformed_edge_list_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.edges");
    fs::write(&bad, "#nodes 3 directed 0\n0 1 1\n0 x 1\n").unwrap();
    let o = contagion(dir.path(), &["simulate", "--graph", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("3"), "{}", stderr(&o));
}
