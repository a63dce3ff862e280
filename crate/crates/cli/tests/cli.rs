use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const LVG: &str = env!("CARGO_BIN_EXE_lvg");

fn lvg(dir: &Path, args: &[&str]) -> Output {
    Command::new(LVG).args(args).current_dir(dir).output().expect("spawn lvg")
}

fn lvg_env(dir: &Path, args: &[&str], key: &str, val: &str) -> Output {
    Command::new(LVG).args(args).env(key, val).current_dir(dir).output().expect("spawn lvg")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn lattice(dir: &Path, n: usize, name: &str) {
    let out = lvg(dir, &["gen-lattice", "--n", &n.to_string(), "--ghost", "--out", name]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn gen_lattice_counts() {
    let tmp = TempDir::new().unwrap();
    let out = lvg(tmp.path(), &["gen-lattice", "--n", "3", "--ghost"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 21);
    assert_eq!(v["edges"].as_array().unwrap().len(), 24);

    let out = lvg(tmp.path(), &["gen-lattice", "--n", "4"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 16);
    assert_eq!(v["edges"].as_array().unwrap().len(), 24);
}

#[test]
fn solve_writes_solution_and_report() {
    let tmp = TempDir::new().unwrap();
    lattice(tmp.path(), 9, "g.json");
    let out = lvg(tmp.path(), &["solve", "--graph", "g.json", "--boundary", "bubble:2", "--out", "s"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("s/report.json")).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    assert!(report["residual_sup"].as_f64().unwrap() <= 1e-10);
    assert!(report["energy_convention"].as_str().unwrap().contains("interior"));
    let csv = fs::read_to_string(tmp.path().join("s/solution.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("vertex_id,i,j,u"));
    assert_eq!(csv.lines().count(), 1 + 81 + 36);
}

#[test]
fn zero_boundary_single_cell_does_not_converge() {
    let tmp = TempDir::new().unwrap();
    lattice(tmp.path(), 1, "g.json");
    let out = lvg(tmp.path(), &["solve", "--graph", "g.json", "--boundary", "zero", "--out", "s"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("did not converge"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("s/report.json")).unwrap()).unwrap();
    assert_eq!(report["converged"], false);
    assert!(report["error"].is_string());
}

const DISCONNECTED: &str = r#"{"vertices": [
  {"id": 0, "mu": 1},
  {"id": 1, "mu": 1},
  {"id": 2, "mu": 1},
  {"id": 3, "mu": 1, "boundary": true}
],
"edges": [
  {"a": 0, "b": 1, "w": 1},
  {"a": 2, "b": 3, "w": 1}
]}
"#;

#[test]
fn interior_cut_off_from_boundary_is_singular() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("g.json"), DISCONNECTED).unwrap();
    fs::write(tmp.path().join("b.csv"), "vertex_id,u\n3,0\n").unwrap();
    for nl in ["zero", "exp"] {
        let out = lvg(
            tmp.path(),
            &["solve", "--graph", "g.json", "--boundary", "file:b.csv", "--nonlinearity", nl, "--out", "s"],
        );
        assert_eq!(code(&out), 3, "{nl}: {}", stderr(&out));
        assert!(stderr(&out).contains("singular Jacobian"));
    }
}

#[test]
fn malformed_graph_names_the_line() {
    let tmp = TempDir::new().unwrap();
    let bad = DISCONNECTED.replace(r#"{"a": 2, "b": 3, "w": 1}"#, r#"{"a": 2, "b": 3, "w": -1}"#);
    fs::write(tmp.path().join("g.json"), bad).unwrap();
    let out = lvg(tmp.path(), &["isoperimetry", "--graph", "g.json"]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("line 9"), "{}", stderr(&out));

    fs::write(tmp.path().join("h.json"), "{\"vertices\": [").unwrap();
    let out = lvg(tmp.path(), &["isoperimetry", "--graph", "h.json"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn bad_arguments_are_input_errors() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&lvg(tmp.path(), &["solve"])), 4);
    assert_eq!(code(&lvg(tmp.path(), &["gen-lattice", "--n", "x"])), 4);
    lattice(tmp.path(), 3, "g.json");
    let out = lvg(tmp.path(), &["solve", "--graph", "g.json", "--boundary", "bubble:-1"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    let out = lvg(tmp.path(), &["solve", "--graph", "g.json", "--boundary", "zero", "--nonlinearity", "sinh"]);
    assert_eq!(code(&out), 4);
    assert_eq!(code(&lvg(tmp.path(), &["--help"])), 0);
}

#[test]
fn missing_file_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    let out = lvg(tmp.path(), &["isoperimetry", "--graph", "nope.json"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("nope.json"));
}

#[test]
fn audit_passes_then_fails_after_corruption() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    lattice(dir, 9, "g.json");
    assert_eq!(code(&lvg(dir, &["solve", "--graph", "g.json", "--boundary", "bubble:2", "--out", "s"])), 0);
    let out = lvg(dir, &["audit", "--graph", "g.json", "--solution", "s/solution.csv", "--cis", "4", "--out", "a"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let ledger: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("a/ledger.json")).unwrap()).unwrap();
    assert_eq!(ledger["final_lower_bound"], 4.0);
    assert!(fs::read_to_string(dir.join("a/ledger.csv")).unwrap().lines().count() > 1);

    // centre of the 9x9 window is id 40
    let csv = fs::read_to_string(dir.join("s/solution.csv")).unwrap();
    let bumped: String = csv
        .lines()
        .map(|l| {
            let mut c: Vec<String> = l.split(',').map(String::from).collect();
            if c[0] == "40" {
                c[3] = (c[3].parse::<f64>().unwrap() + 1.0).to_string();
            }
            c.join(",") + "\n"
        })
        .collect();
    fs::write(dir.join("bad.csv"), bumped).unwrap();
    let out = lvg(dir, &["audit", "--graph", "g.json", "--solution", "bad.csv", "--cis", "4", "--out", "b"]);
    assert_eq!(code(&out), 5);
    assert!(stderr(&out).contains("sigma"), "{}", stderr(&out));
    assert!(dir.join("b/ledger.json").exists());
}

#[test]
fn audit_rejects_a_solution_missing_vertices() {
    let tmp = TempDir::new().unwrap();
    lattice(tmp.path(), 1, "g.json");
    fs::write(tmp.path().join("u.csv"), "vertex_id,i,j,u\n0,0,0,1.0\n").unwrap();
    let out = lvg(tmp.path(), &["audit", "--graph", "g.json", "--solution", "u.csv", "--cis", "4"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn isoperimetry_reports_four_and_refuses_large_windows() {
    let tmp = TempDir::new().unwrap();
    lattice(tmp.path(), 3, "g3.json");
    let out = lvg(tmp.path(), &["isoperimetry", "--graph", "g3.json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["c_is_upper"], 4.0);
    assert_eq!(v["enumerated_count"], 511);

    let out = lvg(tmp.path(), &["isoperimetry", "--graph", "g3.json", "--admissible", "0,1"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["enumerated_count"], 3);

    lattice(tmp.path(), 5, "g5.json");
    let out = lvg(tmp.path(), &["isoperimetry", "--graph", "g5.json"]);
    assert_eq!(code(&out), 6, "{}", stderr(&out));
}

#[test]
fn energy_scan_output_does_not_depend_on_worker_count() {
    let tmp = TempDir::new().unwrap();
    let args = ["energy-scan", "--n", "3,5,9", "--lambdas", "10,2,0.5"];
    let one = lvg_env(tmp.path(), &args, "LVG_JOBS", "1");
    let four = lvg_env(tmp.path(), &args, "LVG_JOBS", "4");
    assert_eq!(code(&one), 0, "{}", stderr(&one));
    assert_eq!(one.stdout, four.stdout);
    let text = String::from_utf8(one.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 9);

    let out = lvg_env(tmp.path(), &args, "LVG_JOBS", "zero");
    assert_eq!(code(&out), 4);

    let out = lvg(tmp.path(), &["energy-scan", "--n", "3", "--lambdas", "10", "--out", "scan"]);
    assert_eq!(code(&out), 0);
    assert!(tmp.path().join("scan/energy_scan.csv").exists());
}

#[test]
fn zero_nonlinearity_gives_the_harmonic_extension() {
    let tmp = TempDir::new().unwrap();
    lattice(tmp.path(), 3, "g.json");
    // boundary u = i is harmonic in the interior, so u = i everywhere
    let text = fs::read_to_string(tmp.path().join("g.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut b = String::from("vertex_id,u\n");
    for vx in v["vertices"].as_array().unwrap() {
        if vx["boundary"] == true {
            b += &format!("{},{}\n", vx["id"], vx["i"]);
        }
    }
    fs::write(tmp.path().join("b.csv"), b).unwrap();
    let out = lvg(
        tmp.path(),
        &["solve", "--graph", "g.json", "--boundary", "file:b.csv", "--nonlinearity", "zero", "--out", "s"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(tmp.path().join("s/solution.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        let (i, u): (f64, f64) = (c[1].parse().unwrap(), c[3].parse().unwrap());
        assert!((u - i).abs() <= 1e-12, "{line}");
    }
}
