use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use renege_talk::binary::wrp_interval;
use renege_talk::continuum::{frontier_receiver, ContinuumSpec, CsOutcome};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_renege-talk"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn renege-talk")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", stdout(o)))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn interval_matches_formula() {
    let o = run(&["binary", "--alpha", "0.6667", "--interval"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (lo, hi) = wrp_interval(0.6667).unwrap();
    assert_eq!(stdout(&o).trim(), format!("lo={lo:.6} hi={hi:.6}"));
    assert_eq!(stdout(&o).trim(), "lo=0.666700 hi=0.833338");
}

#[test]
fn bad_prior_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad_prior.json");
    fs::write(
        &path,
        r#"{"states":["0","1"],"prior":[0.6,0.39],"actions":["0","1"],"uS":[[0,1],[0,1]],"uR":[[1,0],[0,1]]}"#,
    )
    .unwrap();
    let o = run(&["game", "validate", p(&path)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("prior must sum to 1"), "{err}");
    assert!(err.contains("prior"), "{err}");
}

#[test]
fn malformed_and_unknown_flags_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{ not json").unwrap();
    assert_eq!(run(&["game", "validate", p(&path)]).status.code(), Some(2));
    assert_eq!(run(&["game", "validate", p(&data("binary_2_3.json")), "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["binary", "--alpha", "0.4", "--interval"]).status.code(), Some(2));
}

#[test]
fn partition_limit_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("cs10.json");
    let o = run(&["cs", "discretize", "--bias", "0.2", "--n-states", "10", "--n-actions", "12", "--out", p(&game)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["wrp", "certify", p(&game), "--vs", "-0.02", "--vr", "-0.03"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("capability"));
}

#[test]
fn gap_eta_close_to_one_sixth() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gap.json");
    let o = run(&["wrp", "gap", p(&data("binary_2_3.json")), "--grid", "1000", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let eta = v["etaEstimate"].as_f64().unwrap();
    assert!((eta - 1.0 / 6.0).abs() < 0.01, "{eta}");
    assert_eq!(v["assumptionsViolated"], Value::Bool(false));
}

#[test]
fn construct_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for mixed in [false, true] {
        let cert = dir.path().join(format!("cert_{mixed}.json"));
        let mut args = vec!["binary", "--alpha", "0.6666666666666666", "--construct", "--nu", "0.6", "--out", p(&cert)];
        if mixed {
            args.push("--mixed");
        }
        let o = run(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        let o = run(&["wrp", "certify", p(&data("binary_2_3.json")), "--verify", p(&cert)]);
        assert!(o.status.success(), "{}", stdout(&o));
        assert_eq!(json(&o)["valid"], Value::Bool(true));
    }
}

#[test]
fn certify_emits_verifiable_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.json");
    let game = data("binary_2_3.json");
    let o = run(&["wrp", "certify", p(&game), "--vs", "0.6", "--vr", "0.7333333333333333", "--out", p(&cert)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["wrp", "certify", p(&game), "--verify", p(&cert), "--mode", "strict"]);
    assert!(o.status.success());

    // Outside the interval: refused with exit 1.
    let o = run(&["wrp", "certify", p(&game), "--vs", "0.2", "--vr", "0.9333333333333333"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("refused"));

    // A tampered certificate fails verification.
    let text = fs::read_to_string(&cert).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["target"]["vR"] = Value::from(0.9);
    fs::write(&cert, v.to_string()).unwrap();
    let o = run(&["wrp", "certify", p(&game), "--verify", p(&cert)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["valid"], Value::Bool(false));
}

#[test]
fn discretized_game_validates() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("cs.json");
    let o = run(&["cs", "discretize", "--bias", "0.2", "--n-states", "21", "--n-actions", "21", "--out", p(&game)]);
    assert!(o.status.success());
    let o = run(&["game", "validate", p(&game)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&o)["states"], Value::from(21));
}

#[test]
fn figure1_vertices_and_flags() {
    let o = run(&["binary", "figure1", "--alpha", "0.6666666666666666", "--grid", "100"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kind,vS,vR,wrp"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let num = |s: &str| s.parse::<f64>().unwrap();
    let vertices: Vec<(f64, f64)> = rows.iter().filter(|r| r[0] == "vertex").map(|r| (num(r[1]), num(r[2]))).collect();
    let expected = [(0.0, 2.0 / 3.0), (1.0 / 3.0, 1.0), (1.0, 1.0 / 3.0), (2.0 / 3.0, 0.0)];
    assert_eq!(vertices.len(), 4);
    for e in expected {
        assert!(vertices.iter().any(|v| (v.0 - e.0).abs() < 1e-9 && (v.1 - e.1).abs() < 1e-9), "{e:?}");
    }
    let minmax: Vec<f64> = rows.iter().filter(|r| r[0] == "minmax").map(|r| num(r[2])).collect();
    assert_eq!(minmax.len(), 2);
    assert!(minmax.iter().all(|v| (v - 2.0 / 3.0).abs() < 1e-9));
}

#[test]
fn figure1_flags_follow_interval_at_alpha_0_51() {
    let grid = 200;
    let o = run(&["binary", "figure1", "--alpha", "0.51", "--grid", &grid.to_string()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (lo, hi) = wrp_interval(0.51).unwrap();
    // Frontier runs from vR = 1 down to vR = 0.49 over `grid` points.
    let step = (1.0 - 0.49) / (grid - 1) as f64;
    let text = stdout(&o);
    let mut checked = 0;
    for r in text.lines().skip(1).map(|l| l.split(',').collect::<Vec<_>>()).filter(|r| r[0] == "frontier") {
        let v_r: f64 = r[2].parse().unwrap();
        if (v_r - lo).abs() <= 2.0 * step || (v_r - hi).abs() <= 2.0 * step {
            continue;
        }
        let inside = v_r > lo && v_r < hi;
        assert_eq!(r[3] == "true", inside, "vR = {v_r}");
        checked += 1;
    }
    assert!(checked > grid - 10);
}

#[test]
fn figure2_rows_on_the_curve() {
    let o = run(&["cs", "figure2", "--bias", "0.2", "--grid", "200"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,lambdaTilde,vS,vR,certified"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').take(4).map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 200);
    for r in &rows {
        // Output is rounded to 12 significant digits.
        assert!((r[3] - frontier_receiver(0.2, r[2])).abs() < 1e-10);
    }
    for l in text.lines().skip(1).filter(|l| l.ends_with("true")) {
        let f: Vec<f64> = l.split(',').take(4).map(|x| x.parse().unwrap()).collect();
        assert!(f[2] <= f[3]);
    }
}

#[test]
fn cs_certify_and_refuse() {
    let o = run(&["cs", "--bias", "0.2", "--lambda", "0.45", "--certify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["certified"], Value::Bool(true));
    let spec = ContinuumSpec::new(0.2).unwrap();
    let CsOutcome::Certified(c) = renege_talk::continuum::certify_cs(&spec, 0.45).unwrap() else { panic!() };
    assert!((v["receiverPunishment"]["y"].as_f64().unwrap() - c.receiver_punishment.y).abs() < 1e-11);
    let o = run(&["cs", "--bias", "0.2", "--lambda", "0.05", "--certify"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(json(&o)["violated"].as_str().unwrap().contains("Sender deviation cap"));
}

#[test]
fn cs_frontier_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    let o = run(&["cs", "--bias", "0.2", "--frontier", "--grid", "11", "--out", p(&out)]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("lambda,lambdaTilde,vS,vR"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn sim_check_reports() {
    let o = run(&["sim", "check", p(&data("automaton_binary.json")), "--delta", "0.95", "--min-delta"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["spe"]["holds"], Value::Bool(true));
    assert_eq!(v["phases"]["compatible"], Value::Bool(true));
    assert!(v["minDelta"].as_f64().unwrap() <= 0.8);

    let o = run(&["sim", "check", p(&data("automaton_grim.json")), "--delta", "0.95"]);
    let v = json(&o);
    assert_eq!(v["spe"]["holds"], Value::Bool(true));
    assert_eq!(v["phases"]["compatible"], Value::Bool(false));
}

#[test]
fn sim_run_trace_follows_deviations() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let (auto, dev) = (data("automaton_binary.json"), data("deviations.json"));
    let args = [
        "sim",
        "run",
        p(&auto),
        "--delta",
        "0.95",
        "--periods",
        "12",
        "--seed",
        "4",
        "--deviations",
        p(&dev),
        "--out",
        p(&trace),
    ];
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().next(), Some("t,phase,state,message,action,uS,uR"));
    let phases: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    let mut expected = vec!["Normal"; 12];
    expected[4] = "PunishS";
    expected[8] = "PunishR";
    assert_eq!(phases, expected);
    assert_eq!(json(&o)["occupancy"], serde_json::json!([10, 1, 1]));

    // Same invocation, byte-identical output.
    let first = fs::read(&trace).unwrap();
    let again = run(&args);
    assert_eq!(again.stdout, o.stdout);
    assert_eq!(fs::read(&trace).unwrap(), first);
}

#[test]
fn deviation_out_of_horizon_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let dev = dir.path().join("dev.json");
    fs::write(&dev, r#"[{"t": 50, "player": "sender", "kernel": [[0,1],[0,1]]}]"#).unwrap();
    let o = run(&[
        "sim",
        "run",
        p(&data("automaton_binary.json")),
        "--delta",
        "0.9",
        "--periods",
        "10",
        "--deviations",
        p(&dev),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("deviations[0].t"));
}

#[test]
fn sequential_and_parallel_scans_agree() {
    let game = data("binary_2_3.json");
    let seq = bin().env("RENEGE_TALK_THREADS", "0").args(["wrp", "scan", p(&game), "--grid", "60"]).output().unwrap();
    let par = bin().env("RENEGE_TALK_THREADS", "3").args(["wrp", "scan", p(&game), "--grid", "60"]).output().unwrap();
    assert!(seq.status.success() && par.status.success());
    assert_eq!(seq.stdout, par.stdout);
    assert!(stdout(&seq).starts_with("lambda,vS,vR,wrp,capS,frontier_vS_max,margin\n"));
    let bad = bin().env("RENEGE_TALK_THREADS", "many").args(["game", "minmax", p(&game)]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn example_one_weak_boundary() {
    let o = run(&["game", "validate", p(&data("example1.json"))]);
    assert!(o.status.success());
    assert_eq!(json(&o)["assumptionsHold"], Value::Bool(false));
    let o = run(&["wrp", "gap", p(&data("example1.json")), "--grid", "50"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["assumptionsViolated"], Value::Bool(true));
    assert!(v["etaEstimate"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn payoffs_and_frontier() {
    let dir = tempfile::tempdir().unwrap();
    let prof = dir.path().join("p.json");
    fs::write(&prof, r#"{"sender": [[1,0],[0,1]], "receiver": [[1,0],[0,1]]}"#).unwrap();
    let o = run(&["game", "payoffs", p(&data("binary_2_3.json")), "--profile", p(&prof)]);
    let v = json(&o);
    assert!((v["vS"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-11);
    assert!((v["vR"].as_f64().unwrap() - 1.0).abs() < 1e-11);
    let o = run(&["game", "frontier", p(&data("binary_2_3.json")), "--grid", "5"]);
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("vertex")).count(), 4);
    assert_eq!(text.lines().filter(|l| l.starts_with("frontier")).count(), 5);
}
