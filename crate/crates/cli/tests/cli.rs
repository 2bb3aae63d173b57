use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cvp-qubo"))
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str], files: &[&Path]) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    for f in files {
        cmd.arg(f);
    }
    cmd.output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn strs(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
}

const IDENTITY3: &str = r#"{"n":3,"A":[[1,0,0],[0,1,0],[0,0,1]],"x":[7,-2,4]}"#;
const EVEN3: &str = r#"{"n":3,"A":[[2,0,0],[0,2,0],[0,0,2]],"x":[1,1,1]}"#;
const SCALED1: &str = "# 2Z with target 1\n2 1\n";

#[test]
fn bounds_identity_tight_and_paper() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "i.json", IDENTITY3);
    let tight = json(&run(&["bounds"], &[&f]));
    assert_eq!(tight["m"], 2);
    assert_eq!(tight["N"], 9);
    assert_eq!(tight["mode"], "tight");
    let paper = json(&run(&["bounds", "--mode", "paper"], &[&f]));
    assert_eq!(paper["m"], 5);
    assert_eq!(paper["N"], 18);
}

#[test]
fn bounds_singular_exits_2() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "s.txt", "1 2 0\n2 4 1\n");
    let out = run(&["bounds"], &[&f]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular"));
}

#[test]
fn malformed_and_missing_input_exit_2() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.json", r#"{"n":2,"A":[[1,0]],"x":[0,0]}"#);
    assert_eq!(run(&["bounds"], &[&f]).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["reduce"], &[&missing]).status.code(), Some(2));
}

#[test]
fn reduce_examples() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "i.json", IDENTITY3);
    let r = json(&run(&["reduce"], &[&f]));
    assert_eq!(strs(&r["x_hat"]), ["0", "0", "0"]);
    assert_eq!(strs(&r["lambda0"]), ["7", "-2", "4"]);

    let f = write(&dir, "s.txt", SCALED1);
    let r = json(&run(&["reduce"], &[&f]));
    assert_eq!(strs(&r["x_hat"]), ["1"]);
    assert_eq!(strs(&r["lambda0"]), ["0"]);

    let f = write(&dir, "k.txt", "3 1 -1\n1 1 0\n");
    let r = json(&run(&["reduce"], &[&f]));
    assert_eq!(strs(&r["x_hat"]), ["2", "1"]);
    assert_eq!(strs(&r["lambda0"]), ["-3", "-1"]);
}

#[test]
fn build_qubo_lines_exact_text() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "s.txt", SCALED1);
    let out = run(&["build"], &[&f]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "p qubo 2 3\nc constant 25\nc mode derived\nc params 1 1\n1 1 -16\n1 2 16\n2 2 -24\n"
    );
}

#[test]
fn build_json_to_file_and_verbatim_sign() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "s.txt", SCALED1);
    let out_path = dir.path().join("q.json");
    let out = bin()
        .args(["build", "--format", "json", "--sign", "verbatim", "-o"])
        .arg(&out_path)
        .arg(&f)
        .output()
        .unwrap();
    assert!(out.status.success());
    let q: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(q["N"], 2);
    assert_eq!(q["mode"], "verbatim");
    // the off-diagonal couplings do not depend on the sign convention
    assert_eq!(q["q"][0][1], "8");
    assert_eq!(q["q"][1][0], "8");
}

#[test]
fn solve_qubo_examples() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "s.txt", SCALED1);
    let q = dir.path().join("q.txt");
    assert!(bin().args(["build", "-o"]).arg(&q).arg(&f).status().unwrap().success());
    let r = json(&run(&["solve-qubo"], &[&q]));
    assert_eq!(r["method"], "exhaustive");
    assert_eq!(r["proven_optimal"], true);
    assert_eq!(r["value"], "-24");
    assert_eq!(r["objective_with_constant"], "1");

    let z = write(&dir, "z.txt", "p qubo 3 0\n");
    let r = json(&run(&["solve-qubo"], &[&z]));
    assert_eq!(r["assignment"], "000");
    assert_eq!(r["value"], "0");

    let neg = write(&dir, "n.txt", "p qubo 2 2\n1 1 -1\n2 2 -1\n");
    let r = json(&run(&["solve-qubo", "--method", "sa", "--seed", "3"], &[&neg]));
    assert_eq!(r["assignment"], "11");
    assert_eq!(r["value"], "-2");
    assert_eq!(r["proven_optimal"], false);
}

#[test]
fn solve_examples() {
    let dir = TempDir::new().unwrap();
    let cases = [(IDENTITY3, vec!["7", "-2", "4"], "0"), (EVEN3, vec!["0", "0", "0"], "3"), (SCALED1, vec!["0"], "1")];
    for (k, (body, _, dist)) in cases.iter().enumerate() {
        let f = write(&dir, &format!("c{k}"), body);
        let r = json(&run(&["solve"], &[&f]));
        assert_eq!(r["solution"]["dist_sq"], *dist, "case {k}");
        assert_eq!(r["report"]["passed"], true, "case {k}");
        assert_eq!(r["report"]["matches_oracle"], true, "case {k}");
    }
    let f = write(&dir, "i.json", IDENTITY3);
    let r = json(&run(&["solve"], &[&f]));
    assert_eq!(strs(&r["solution"]["lambda"]), cases[0].1);
}

#[test]
fn solve_over_cap_exits_1() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "i.json", IDENTITY3);
    let out = run(&["solve", "--method", "exhaustive", "--cap", "4"], &[&f]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn solve_with_sa_agrees_on_small_instance() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "e.json", EVEN3);
    let r = json(&run(&["solve", "--method", "sa", "--seed", "5"], &[&f]));
    assert_eq!(r["solution"]["dist_sq"], "3");
    assert_eq!(r["solution"]["certificate"], "heuristic");
}

#[test]
fn oracle_examples() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "e.json", EVEN3);
    let r = json(&run(&["oracle"], &[&f]));
    assert_eq!(r["dist_sq"], "3");
    let r = json(&run(&["oracle", "--certified"], &[&f]));
    assert_eq!(r["dist_sq"], "3");

    let f = write(&dir, "i.json", IDENTITY3);
    let r = json(&run(&["oracle", "--radius", "1"], &[&f]));
    assert_eq!(strs(&r["lambda"]), ["7", "-2", "4"]);
    assert_eq!(r["dist_sq"], "0");

    let f = write(&dir, "k.txt", "3 1 -1\n1 1 0\n");
    let r = json(&run(&["oracle", "--certified"], &[&f]));
    assert_eq!(r["dist_sq"], "1");
}

#[test]
fn verify_accepts_solution_and_rejects_tampering() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "e.json", EVEN3);
    let out = run(&["solve"], &[&f]);
    let sol = write(&dir, "sol.json", &String::from_utf8(out.stdout).unwrap());
    let r = json(&run(&["verify"], &[&f, &sol]));
    assert_eq!(r["passed"], true);

    // a consistent lattice point, but not a closest one
    let far = write(&dir, "far.json", r#"{"z":["2","0","0"],"lambda":["4","0","0"],"dist_sq":"11"}"#);
    let out = run(&["verify"], &[&f, &far]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["passed"], false);
    assert_eq!(r["lambda_ok"], true);
    assert_eq!(r["dist_sq_ok"], true);
    assert_eq!(r["matches_oracle"], false);

    // lambda is not A z
    let bad = write(&dir, "bad.json", r#"{"z":["1","1","1"],"lambda":["0","0","0"],"dist_sq":"3"}"#);
    let out = run(&["verify"], &[&f, &bad]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["lambda_ok"], false);

    // understated distance
    let short = write(&dir, "short.json", r#"{"z":["0","0","0"],"lambda":["0","0","0"],"dist_sq":"2"}"#);
    let out = run(&["verify"], &[&f, &short]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["dist_sq_ok"], false);
}

#[test]
fn stdin_input() {
    let mut child = bin()
        .args(["bounds", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(IDENTITY3.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(json(&out)["m"], 2);
}

#[test]
fn deterministic_given_seed() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "m.json", r#"{"n":3,"A":[[3,-1,2],[1,2,-3],[-2,1,1]],"x":[17,-9,4]}"#);
    let strip = |o: Output| {
        let mut v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v["qubo"].as_object_mut().unwrap().remove("wall_time_ms");
        v
    };
    let args = ["solve", "--method", "sa", "--seed", "11", "--sa-sweeps", "200"];
    let a = strip(run(&args, &[&f]));
    let b = strip(run(&args, &[&f]));
    assert_eq!(a, b);
}
