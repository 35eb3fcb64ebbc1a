use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const GAMBLER: &str = r#"{"regime":"stationary","n_states":4,
  "matrices":[[0.5,0.5,0,0, 0.5,0,0.5,0, 0,0.5,0,0.5, 0,0,0.5,0.5]],"set_A":[0],"set_B":[3]}"#;

const TOY: &str = r#"{"regime":"stationary","n_states":5,"matrices":[[
  [0.6,0.3,0.1,0,0],[0.2,0.4,0.2,0.2,0],[0.1,0.2,0.3,0.2,0.2],[0,0.1,0.3,0.4,0.2],[0,0,0.2,0.3,0.5]]],
  "set_A":[0],"set_B":[4]}"#;

fn tpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tpt")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
}

fn error_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn gambler_committor_is_linear() {
    let d = tempfile::tempdir().unwrap();
    let chain = write(d.path(), "g.json", GAMBLER);
    let out = d.path().join("out");
    ok(&tpt(&["committor", "--chain", &chain, "--out", out.to_str().unwrap()]));
    let csv = fs::read_to_string(out.join("committors.csv")).unwrap();
    let q: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    for (i, v) in q.iter().enumerate() {
        assert!((v - i as f64 / 3.0).abs() < 1e-14);
    }
    let meta = read_json(&out.join("metadata.json"));
    assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
    assert!(meta["rng"].as_str().unwrap().starts_with("chacha20"));
    assert!(meta["residuals"]["forward"].as_f64().unwrap() < 1e-10);
    assert!(out.join("config.json").exists());
}

#[test]
fn one_period_matches_stationary_byte_for_byte() {
    let d = tempfile::tempdir().unwrap();
    let stat = write(d.path(), "s.json", TOY);
    let per = write(d.path(), "p.json", &TOY.replace(r#""regime":"stationary""#, r#""regime":"periodic","period":1"#));
    for fmt in ["csv", "json"] {
        let (a, b) = (d.path().join(format!("a-{fmt}")), d.path().join(format!("b-{fmt}")));
        ok(&tpt(&["stats", "--chain", &stat, "--out", a.to_str().unwrap(), "--format", fmt]));
        ok(&tpt(&["stats", "--chain", &per, "--out", b.to_str().unwrap(), "--format", fmt]));
        let files: &[&str] = if fmt == "csv" {
            &["distribution.csv", "current.csv", "rates.csv", "aggregates.csv", "conservation.json"]
        } else {
            &["stats.json", "conservation.json"]
        };
        for f in files {
            assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
        }
    }
}

#[test]
fn bad_rows_exit_with_validation_code() {
    let d = tempfile::tempdir().unwrap();
    let chain = write(d.path(), "bad.json", r#"{"regime":"stationary","n_states":2,"matrices":[[0.5,0.4,0,1]],"set_A":[0],"set_B":[1]}"#);
    let out = tpt(&["committor", "--chain", &chain, "--out", d.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_json(&out);
    assert_eq!(e["error"]["kind"], "validation");
    assert!(e["error"]["message"].as_str().unwrap().contains("row not stochastic"));
    assert_eq!(e["error"]["diagnostics"][0]["kind"], "row_not_stochastic");
}

#[test]
fn unmet_residual_target_is_a_solver_failure() {
    let d = tempfile::tempdir().unwrap();
    let chain = write(d.path(), "t.json", TOY);
    let o = d.path().join("o");
    let out = tpt(&["committor", "--chain", &chain, "--out", o.to_str().unwrap(), "--tolerance", "equation_residual=1e-300"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(error_json(&out)["error"]["kind"], "solver");
}

#[test]
fn bad_arguments_are_input_errors() {
    let d = tempfile::tempdir().unwrap();
    let chain = write(d.path(), "g.json", GAMBLER);
    let o = d.path().join("o");
    let o = o.to_str().unwrap();
    assert_eq!(tpt(&["committor", "--chain", &chain, "--out", o, "--tolerance", "nope=1"]).status.code(), Some(2));
    assert_eq!(tpt(&["committor", "--out", o]).status.code(), Some(2));
    let both = write(d.path(), "c.json", r#"{"chain":"g.json","ulam":{"potential":"flat","sigma":1,"tau":0.1,"samples_per_cell":1}}"#);
    assert_eq!(tpt(&["committor", "--config", &both, "--out", o]).status.code(), Some(2));
    assert_eq!(tpt(&["committor", "--chain", "/no/such/file.json", "--out", o]).status.code(), Some(2));
}

#[test]
fn convergence_table_and_fit() {
    let d = tempfile::tempdir().unwrap();
    let chain = write(d.path(), "g.json", GAMBLER);
    let o = d.path().join("o");
    ok(&tpt(&["converge", "--chain", &chain, "--out", o.to_str().unwrap(), "--windows", "0,1,2,4,8,16,32,64,128"]));
    let csv = fs::read_to_string(o.join("convergence.csv")).unwrap();
    let first: Vec<f64> = csv.lines().nth(1).unwrap().split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    // no time left: q+ = 1_B against (0, 1/3, 2/3, 1)
    assert!((first[0] - 5f64.sqrt() / 3.0).abs() < 1e-12);
    assert!((first[1] - 5f64.sqrt() / 3.0).abs() < 1e-12);
    let meta = read_json(&o.join("metadata.json"));
    let fit = &meta["results"]["forward_fit"];
    assert!(fit["slope"].as_f64().unwrap() < 0.0 && fit["r_squared"].as_f64().unwrap() > 0.9);
    assert!(meta["results"]["converged_at"].as_u64().is_some());
}

#[test]
fn validate_passes_on_small_chains() {
    let d = tempfile::tempdir().unwrap();
    let chain = write(d.path(), "t.json", TOY);
    let o = d.path().join("o");
    ok(&tpt(&["validate", "--chain", &chain, "--out", o.to_str().unwrap(), "--samples", "200000", "--seed", "7"]));
    let r = read_json(&o.join("validation.json"));
    assert!(r["failures"].as_array().unwrap().is_empty());
    assert!(r["estimator"]["z_score"].as_f64().unwrap() <= 3.0);

    let fin = write(d.path(), "f.json", &TOY.replace(r#""regime":"stationary""#, r#""regime":"finite","horizon":4,"initial_density":[0.2,0.2,0.2,0.2,0.2]"#));
    let o = d.path().join("of");
    ok(&tpt(&["validate", "--chain", &fin, "--out", o.to_str().unwrap(), "--samples", "50000"]));
    let r = read_json(&o.join("validation.json"));
    assert!(r["max_enumeration_deviation"].as_f64().unwrap() <= 1e-10);
    assert_eq!(r["estimator"]["kind"], "ensemble");
    let meta = read_json(&o.join("metadata.json"));
    assert!(meta["notes"][0].as_str().unwrap().contains("irreducibility"));
}

#[test]
fn simulate_is_seeded() {
    let d = tempfile::tempdir().unwrap();
    let chain = write(d.path(), "t.json", TOY);
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    ok(&tpt(&["simulate", "--chain", &chain, "--out", a.to_str().unwrap(), "--samples", "500", "--seed", "3"]));
    ok(&tpt(&["simulate", "--chain", &chain, "--out", b.to_str().unwrap(), "--samples", "500", "--seed", "3"]));
    let text = fs::read_to_string(a.join("trajectories.csv")).unwrap();
    assert_eq!(text, fs::read_to_string(b.join("trajectories.csv")).unwrap());
    assert!(text.starts_with("# n_states=5\n# length=500\n# seed=3\n# generator=chacha20"));
    assert_eq!(text.lines().count(), 5 + 500);
}

#[test]
fn grid_chain_round_trips_through_a_file() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "u.json",
        r#"{"ulam":{"grid":{"x_range":[-2,2],"y_range":[-1,2],"cell_size":0.5},
            "potential":"triple_well","sigma":1.0,"tau":0.3,"samples_per_cell":200,"set_radius":0.6},"seed":5}"#,
    );
    let (direct, built, again) = (d.path().join("direct"), d.path().join("built"), d.path().join("again"));
    ok(&tpt(&["stats", "--config", &cfg, "--out", direct.to_str().unwrap()]));
    ok(&tpt(&["ulam-build", "--config", &cfg, "--out", built.to_str().unwrap()]));
    let chain = built.join("chain.json");
    let file = read_json(&chain);
    assert!(file["grid"].is_object());
    ok(&tpt(&["stats", "--chain", chain.to_str().unwrap(), "--out", again.to_str().unwrap()]));
    for f in ["distribution.csv", "current.csv", "rates.csv", "aggregates.csv", "current_vectors.csv"] {
        assert_eq!(fs::read(direct.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }
    let meta = read_json(&direct.join("metadata.json"));
    assert_eq!(meta["set_radius"].as_f64(), Some(0.6));
}
