use qprop::io;
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn qprop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qprop")).args(args).env_remove("QPROP_SEED").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn result<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["results"].as_array().unwrap().iter().find(|r| r["name"] == name).unwrap_or_else(|| panic!("no line {name}"))
}

/// Runs a command and stores its artifact at `path`.
fn save_artifact(args: &[&str], path: &Path) {
    let out = qprop(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    std::fs::write(path, json(&out)["artifact"].to_string()).unwrap();
}

#[test]
fn tower_effros_shen_shapes() {
    let out = qprop(&["tower", "effros-shen", "--cf", "0,1,1,1", "--depth", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(result(&r, "levels")["value"], "(1),(1,1),(2,1),(3,2)");
    let tower = io::parse_tower(r["artifact"].to_string().as_bytes()).unwrap();
    assert_eq!(tower.top().dims(), &[3, 2]);
    assert_eq!(r["verified"], true);
    assert_eq!(r["seed"], 0);
}

#[test]
fn errors_exit_two_with_structured_object() {
    let out = qprop(&["tower", "effros-shen", "--cf", "0,0,1", "--depth", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "invalid-quotient");
    let out = qprop(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json(&out)["error"]["message"].is_string());
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.json");
    std::fs::write(&p, r#"{"levels":[[1]],"steps":[],"label":""}"#).unwrap();
    let out = qprop(&["trace", "pullback", "--tower", p.to_str().unwrap(), "--trace", p.to_str().unwrap(), "--level", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "schema");
}

#[test]
fn golden_chain_bound_is_two_thirteenths_plus_bridge() {
    let out = qprop(&["propinquity", "chain", "--golden-family", "8", "--N", "3", "--k", "4", "--samples", "10", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(result(&r, "truncation-term")["value"], "2/13");
    let bridge = result(&r, "bridge/bound")["value"].as_f64().unwrap();
    assert_eq!(result(&r, "bound")["value"].as_f64().unwrap(), 2.0 / 13.0 + bridge);
    assert_eq!(r["seed"], 3);
}

#[test]
fn seed_falls_back_to_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qprop"))
        .args(["element", "random", "--shape", "2"])
        .env("QPROP_SEED", "41")
        .output()
        .unwrap();
    let a = json(&out);
    assert_eq!(a["seed"], 41);
    let b = json(&qprop(&["element", "random", "--shape", "2", "--seed", "41"]));
    assert_eq!(a, b);
}

#[test]
fn tolerance_overrides_only_tighten_without_flag() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    save_artifact(&["spec", "effros-shen", "--cf", "0,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1", "--depth", "3"], &spec);
    let s = spec.to_str().unwrap();
    let base = ["propinquity", "beta-bound", "--spec", s, "--level", "1", "--samples", "10"];
    assert_eq!(qprop(&base).status.code(), Some(0));
    let loose = qprop(&[&base[..], &["--tol", "0.5"]].concat());
    assert_eq!(loose.status.code(), Some(2));
    assert_eq!(json(&loose)["error"]["kind"], "config");
    assert_eq!(qprop(&[&base[..], &["--tol", "0.5", "--allow-loose-tol"]].concat()).status.code(), Some(0));
    let tight = json(&qprop(&[&base[..], &["--tol", "0"]].concat()));
    assert_eq!(result(&tight, "bound")["tolerance"], 0.0);
    assert_eq!(result(&tight, "bound")["value"], "1/2");
}

#[test]
fn unverified_isometry_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = |n: &str| dir.path().join(n);
    std::fs::write(path("t.json"), r#"{"version":1,"levels":[[1],[1,1],[1,2]],"steps":[[[1],[1]],[[1,0],[1,1]]],"label":"t"}"#).unwrap();
    let out = qprop(&["isometry", "relabel", "--tower", path("t.json").to_str().unwrap(), "--perms", "[[0],[1,0],[1,0]]"]);
    assert_eq!(out.status.code(), Some(0));
    let art = &json(&out)["artifact"];
    std::fs::write(path("copy.json"), art["tower"].to_string()).unwrap();
    std::fs::write(path("map.json"), art["map"].to_string()).unwrap();
    std::fs::write(path("w.json"), r#"{"version":1,"shape":[1,2],"lambda":[0.25,0.75]}"#).unwrap();
    std::fs::write(path("w2.json"), r#"{"version":1,"shape":[2,1],"lambda":[0.75,0.25]}"#).unwrap();
    std::fs::write(path("bad.json"), r#"{"version":1,"shape":[2,1],"lambda":[0.751,0.249]}"#).unwrap();
    let p = |n: &str| path(n).to_str().unwrap().to_string();
    save_artifact(&["spec", "build", "--tower", &p("t.json"), "--kind", "cond-exp", "--beta", "1,1/2", "--trace", &p("w.json")], &path("u.json"));
    save_artifact(&["spec", "build", "--tower", &p("copy.json"), "--kind", "cond-exp", "--beta", "1,1/2", "--trace", &p("w2.json")], &path("v.json"));
    save_artifact(&["spec", "build", "--tower", &p("copy.json"), "--kind", "cond-exp", "--beta", "1,1/2", "--trace", &p("bad.json")], &path("vb.json"));
    let good = qprop(&["isometry", "verify", "--map", &p("map.json"), "--u", &p("u.json"), "--v", &p("v.json"), "--samples", "30"]);
    assert_eq!(good.status.code(), Some(0), "{}", String::from_utf8_lossy(&good.stdout));
    let bad = qprop(&["isometry", "verify", "--map", &p("map.json"), "--u", &p("u.json"), "--v", &p("vb.json"), "--samples", "30"]);
    assert_eq!(bad.status.code(), Some(1));
    let r = json(&bad);
    assert_eq!(r["verified"], false);
    assert_eq!(result(&r, "check:trace")["passed"], false);
}

#[test]
fn csv_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.csv");
    let out = qprop(&["trace", "effros-shen", "--cf", "0,2,1,3,1,4", "--level", "2", "--rational", "--format", "csv", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("command,seed,name,value,tolerance,source,passed"));
    assert!(lines.any(|l| l.starts_with("trace effros-shen,0,t,")));
}

#[test]
fn kantorovich_reports_exact_and_lower_bound() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    std::fs::write(p("t.json"), r#"{"version":1,"levels":[[1],[1,1]],"steps":[[[1],[1]]],"label":"two"}"#).unwrap();
    std::fs::write(p("d1.json"), r#"{"version":1,"shape":[1,1],"lambda":[1,0]}"#).unwrap();
    std::fs::write(p("d2.json"), r#"{"version":1,"shape":[1,1],"lambda":[0,1]}"#).unwrap();
    save_artifact(&["spec", "build", "--tower", &p("t.json"), "--kind", "cond-exp", "--beta", "1"], Path::new(&p("s.json")));
    let out = qprop(&["kantorovich", "--spec", &p("s.json"), "--phi", &p("d1.json"), "--psi", &p("d2.json"), "--samples", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!((result(&r, "exact")["value"].as_f64().unwrap() - 2.0).abs() <= 1e-9);
    assert!(result(&r, "lower-bound")["value"].as_f64().unwrap() <= 2.0 + 1e-9);
}

#[test]
fn reports_chain_as_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let (spec, x) = (dir.path().join("s.json"), dir.path().join("x.json"));
    let path = |p: &Path| p.to_str().unwrap().to_owned();
    for args in [
        vec!["spec", "effros-shen", "--cf", "0,1,1,1,1", "--depth", "3", "--out", &path(&spec)],
        vec!["element", "random", "--shape", "3,2", "--self-adjoint", "--out", &path(&x)],
    ] {
        assert_eq!(qprop(&args).status.code(), Some(0));
    }
    let from_reports = qprop(&["lipnorm", "--spec", &path(&spec), "--element", &path(&x)]);
    assert_eq!(from_reports.status.code(), Some(0), "{}", String::from_utf8_lossy(&from_reports.stdout));
    let raw = dir.path().join("raw.json");
    std::fs::write(&raw, json(&qprop(&["spec", "effros-shen", "--cf", "0,1,1,1,1", "--depth", "3"]))["artifact"].to_string()).unwrap();
    let from_raw = qprop(&["lipnorm", "--spec", &path(&raw), "--element", &path(&x)]);
    assert_eq!(from_reports.stdout, from_raw.stdout);

    let info = dir.path().join("info.json");
    assert_eq!(qprop(&["lipnorm", "--spec", &path(&spec), "--element", &path(&x), "--out", &path(&info)]).status.code(), Some(0));
    let out = qprop(&["lipnorm", "--spec", &path(&info), "--element", &path(&x)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "parse");
}

#[test]
fn uhf_multipliers_cycle() {
    let out = qprop(&["tower", "uhf", "--mult", "2,3", "--depth", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(result(&json(&out), "levels")["value"], "(1),(2),(6),(12),(36)");
}
