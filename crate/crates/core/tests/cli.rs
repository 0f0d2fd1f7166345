use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_routecap")).args(args).output().unwrap()
}

fn records(out: &Output) -> Vec<Value> {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn subtrees_of_the_triangle() {
    let recs = records(&run(&["subtrees", "--network", &data("triangle.toml")]));
    assert_eq!(recs.len(), 9);
    assert_eq!(recs[0]["session_id"], "1->2");
    assert_eq!(recs[0]["subtrees"], serde_json::json!([[1], [2, 3]]));
    assert_eq!(recs[8]["count"], 3);
}

#[test]
fn feasibility_and_boundary() {
    let tri = data("triangle.toml");
    let yes = records(&run(&["feasible", "--network", &tri, "--rates", &data("unicast_cycle.json")]));
    assert_eq!(yes[0]["feasible"], true);
    let no = records(&run(&["feasible", "--network", &tri, "--rates", &data("broadcast_two.json")]));
    assert_eq!(no[0]["feasible"], false);
    assert!(no[0]["certificate"].is_object());
    let half = records(&run(&["feasible", "--network", &tri, "--rates", &data("broadcast_half.toml")]));
    assert_eq!(half[0]["feasible"], true);
    let b = records(&run(&[
        "boundary",
        "--network",
        &tri,
        "--rates",
        &data("unicast_cycle.json"),
        "--distance",
        "1,1,1",
    ]));
    assert_eq!(b[0]["on_hyperplane"], b[0]["boundary_conditions"]);
}

#[test]
fn description_matches_oracle() {
    let recs = records(&run(&["describe", "--network", &data("triangle.toml"), "--oracle"]));
    let last = recs.last().unwrap();
    assert_eq!(last["regions_equal"], true);
    assert_eq!(last["survivors"].as_u64().unwrap() as usize, recs.len() - 1);
    let oracle = records(&run(&["oracle", "--network", &data("triangle.toml")]));
    assert_eq!(oracle.len() as u64, last["oracle_rows"].as_u64().unwrap());
}

#[test]
fn ring_commands() {
    let g = records(&run(&["ring", "lower-bound", "--edges", "8"]));
    assert_eq!(g[0]["forced_relations"], true);
    let v = records(&run(&["ring", "verify-lower-bound", "--edges", "5", "--max-distance", "1"]));
    assert_eq!(v[0]["eliminators"], serde_json::json!([]));
    let e = records(&run(&["ring", "embed-cycle", "--network", &data("pentagon_chord.toml"), "--cycle", "1,2,3,4,5"]));
    assert_eq!(e[0]["cycle"], serde_json::json!([1, 2, 3, 4, 5]));
    assert_eq!(run(&["ring", "g4", "--edges", "8"]).stdout, run(&["ring", "lower-bound", "--edges", "8"]).stdout);
}

#[test]
fn experiment_is_deterministic() {
    let args = ["ring", "rounding", "--edges", "8", "--m", "6", "--gmax", "2097152", "--trials", "20", "--seed", "5"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = run(&["ring", "thm7", "--edges", "8", "--m", "6", "--gmax", "2097152", "--trials", "20", "--seed", "6"]);
    assert_eq!(records(&other)[0]["seed"], 6);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("routecap-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ineq.jsonl");
    let out = run(&[
        "--out",
        path.to_str().unwrap(),
        "ineq",
        "--network",
        &data("triangle.toml"),
        "--distance",
        "1,1,1",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let rec: Value = serde_json::from_str(text.trim()).unwrap();
    assert!(rec["rhs"].is_string());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    let tri = data("triangle.toml");
    assert_eq!(run(&["ineq", "--network", &data("unicast_cycle.json"), "--distance", "1"]).status.code(), Some(1));
    assert_eq!(run(&["ineq", "--network", &tri, "--distance", "1,x,1"]).status.code(), Some(1));
    assert_eq!(run(&["ineq", "--network", &tri, "--distance", "1,1"]).status.code(), Some(1));
    assert_eq!(run(&["describe", "--network", &tri, "--max-distance", "3", "--cap", "10"]).status.code(), Some(2));
    assert_eq!(
        run(&["ring", "rounding", "--edges", "8", "--m", "6", "--gmax", "100", "--trials", "1"]).status.code(),
        Some(1)
    );
    let missing = run(&["subtrees", "--network", "/nonexistent/net.toml"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));
}
