use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn relaxround(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaxround"))
        .args(args)
        .output()
        .unwrap()
}

fn ok_stdout(args: &[&str]) -> String {
    let out = relaxround(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn gen_hard(dir: &TempDir, c: u64) -> String {
    let path = dir.path().join(format!("hard{c}.inst"));
    let p = path.to_str().unwrap().to_string();
    ok_stdout(&["gen-hard", "--c", &c.to_string(), "--out", &p]);
    p
}

fn solve_json(args: &[&str]) -> Value {
    let mut full = vec!["solve"];
    full.extend_from_slice(args);
    serde_json::from_str(&ok_stdout(&full)).unwrap()
}

fn strip_seconds(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("seconds");
            map.values_mut().for_each(strip_seconds);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_seconds),
        _ => {}
    }
}

#[test]
fn ratio_prints_table_value() {
    assert_eq!(
        ok_stdout(&["ratio", "--reward", "min:c=2"]).trim(),
        "0.7293"
    );
    let curve = ok_stdout(&["ratio", "--reward", "log", "--curve", "--limit", "3"]);
    let mut lines = curve.lines();
    assert_eq!(lines.next(), Some("x,alpha"));
    let rows: Vec<(String, f64)> = lines
        .map(|l| {
            let (x, a) = l.split_once(',').unwrap();
            (x.to_string(), a.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 3);
    for ((x, a), (want_x, want)) in rows
        .iter()
        .zip([("1", 0.8272), ("2", 0.8902), ("3", 0.9240)])
    {
        assert_eq!(x, want_x);
        assert!((a - want).abs() <= 1e-3, "alpha({x}) = {a}");
    }
}

#[test]
fn gen_hard_sidecar() {
    let dir = TempDir::new().unwrap();
    let p = gen_hard(&dir, 2);
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{p}.json")).unwrap()).unwrap();
    assert_eq!(meta["opt_value"], 6.0);
    assert_eq!(meta["k"], 6);
    let oracle: Value = serde_json::from_str(&ok_stdout(&[
        "oracle",
        "--instance",
        &p,
        "--reward",
        "min:c=2",
        "--k",
        "6",
    ]))
    .unwrap();
    assert_eq!(oracle["value"], 6.0);
}

#[test]
fn solve_hard_instance_beats_greedy() {
    let dir = TempDir::new().unwrap();
    let p = gen_hard(&dir, 4);
    let r = solve_json(&[
        "--instance",
        &p,
        "--reward",
        "min:c=4",
        "--k",
        "20",
        "--rounds",
        "200",
    ]);
    let greedy = r["greedy"]["value"].as_f64().unwrap();
    let rounded = r["round"]["value"].as_f64().unwrap();
    assert!(rounded >= greedy, "rounded {rounded} < greedy {greedy}");
    assert_eq!(r["set"].as_array().unwrap().len(), 20);
    assert_eq!(r["round"]["trials"], 200);
    for key in ["mu", "eta", "T", "iters", "stopped_early"] {
        assert!(!r["solve"][key].is_null(), "missing solve.{key}");
    }
    assert_eq!(r["config"]["epsilon"], 0.01);
    assert_eq!(r["config"]["seed"], 0);
}

#[test]
fn solve_trivial_budgets() {
    let dir = TempDir::new().unwrap();
    let p = gen_hard(&dir, 3);
    let r = solve_json(&["--instance", &p, "--reward", "min:c=3", "--k", "0"]);
    assert_eq!(r["round"]["value"], 0.0);
    assert_eq!(r["set"], Value::Array(vec![]));

    // no iterations: the greedy vertex is integral and rounds to itself
    let r = solve_json(&[
        "--instance",
        &p,
        "--reward",
        "min:c=3",
        "--k",
        "5",
        "--max-iter",
        "0",
    ]);
    assert_eq!(r["solve"]["iters"], 0);
    assert_eq!(r["round"]["value"], r["greedy"]["value"]);
}

#[test]
fn reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let p = gen_hard(&dir, 5);
    let args = [
        "--instance",
        &p,
        "--reward",
        "log",
        "--k",
        "12",
        "--rounds",
        "5",
        "--seed",
        "3",
    ];
    let mut a = solve_json(&args);
    let mut b = solve_json(&args);
    strip_seconds(&mut a);
    strip_seconds(&mut b);
    assert_eq!(a, b);
}

#[test]
fn convert_then_solve_with_trace() {
    let dir = TempDir::new().unwrap();
    let snap = dir.path().join("g.txt");
    let mut f = std::fs::File::create(&snap).unwrap();
    writeln!(f, "# toy graph\n0 1\n1 2\n2 3\n3 0\n0 2").unwrap();
    let inst = dir.path().join("g.inst");
    let trace = dir.path().join("trace.csv");
    ok_stdout(&[
        "convert",
        "--snap",
        snap.to_str().unwrap(),
        "--out",
        inst.to_str().unwrap(),
    ]);
    let r = solve_json(&[
        "--instance",
        inst.to_str().unwrap(),
        "--reward",
        "min:c=2",
        "--k",
        "2",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(r["set"].as_array().unwrap().len(), 2);
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iter,smooth_value,true_value"));
    assert_eq!(
        lines.count(),
        r["solve"]["iters"].as_u64().unwrap() as usize + 1
    );

    let csv = ok_stdout(&[
        "solve",
        "--snap",
        snap.to_str().unwrap(),
        "--reward",
        "log",
        "--k",
        "1",
        "--format",
        "csv",
    ]);
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("greedy_value,solve_value,round_value,"));
}

#[test]
fn bench_rows() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (gen_hard(&dir, 6), gen_hard(&dir, 7));
    let out = ok_stdout(&[
        "bench",
        "--instance",
        &a,
        "--instance",
        &b,
        "--k",
        "20,40",
        "--reward",
        "min:c=2",
    ]);
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("instance,k,c_or_reward,stage,mean_seconds,std_seconds,objective")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        assert_eq!(row[3], "total");
        assert!(row[5].parse::<f64>().unwrap() >= 0.0);
    }

    let out = ok_stdout(&["bench", "--hard", "5", "--trials", "2", "--stages"]);
    let stages: Vec<&str> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(stages, ["greedy", "solve", "round", "total"]);
}

#[test]
fn errors_exit_nonzero() {
    let missing = relaxround(&[
        "solve",
        "--instance",
        "/nonexistent.inst",
        "--reward",
        "log",
        "--k",
        "1",
    ]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("error"));

    let dir = TempDir::new().unwrap();
    let p = gen_hard(&dir, 2);
    let bad_reward = relaxround(&["solve", "--instance", &p, "--reward", "nope", "--k", "1"]);
    assert_eq!(bad_reward.status.code(), Some(1));
    let too_big = relaxround(&["solve", "--instance", &p, "--reward", "log", "--k", "1000"]);
    assert_eq!(too_big.status.code(), Some(1));
    let both = relaxround(&[
        "solve",
        "--instance",
        &p,
        "--reward",
        "log",
        "--k",
        "1",
        "--eta",
        "0.1",
        "--eta-scale",
        "2",
    ]);
    assert!(!both.status.success());
}
