use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn antextrap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_antextrap"))
        .args(args)
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
fn min_samples_magnitude_horn() {
    let o = antextrap(&["min-samples", "--model", "horn", "--kind", "mag"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "11");
}

#[test]
fn single_element_at_boresight() {
    let o = antextrap(&["simulate", "--model", "rect", "--rows", "1", "--cols", "1", "--at", "0,0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().nth(1).unwrap().ends_with(",1+0i"), "{out}");
}

#[test]
fn missing_config_is_malformed_input() {
    let o = antextrap(&["experiment", "missing.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_key_named_in_message() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "model.family = \"rect\"\nmodel.rows = 2\nmodel.cols = 2\ntrials = -1\nout.dir = \"x\"\n").unwrap();
    let o = antextrap(&["experiment", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("trials"), "{}", stderr(&o));
}

#[test]
fn bad_pattern_value_named_in_message() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("p.json");
    fs::write(
        &p,
        r#"{"kind": "complex", "points": [{"azimuth": 0.0, "elevation": 0.0}], "values": [[1.0]]}"#,
    )
    .unwrap();
    let o = antextrap(&["extrapolate", "--model", "rect", "--rows", "1", "--cols", "2", "--pattern", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("values[0]"), "{}", stderr(&o));
}

fn write_config(dir: &Path, out: &Path, trials: usize) -> std::path::PathBuf {
    let cfg = dir.join("exp.toml");
    fs::write(
        &cfg,
        format!(
            "model.family = \"rect\"\nmodel.rows = 2\nmodel.cols = 2\nsampling.kind = \"random\"\nsampling.count = 40\n\
             noise.sigmas = [0.0, 0.1]\ntrials = {trials}\nseed = 5\nsolver.iterations = 3\nsolver.restarts = 2\n\
             lattice.step_deg = 15.0\nout.dir = \"{}\"\n",
            out.display()
        ),
    )
    .unwrap();
    cfg
}

#[test]
fn experiment_outputs_independent_of_threads_and_subset() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &tmp.path().join("unused"), 6);
    let cfg = cfg.to_str().unwrap();
    let run = |name: &str, extra: &[&str]| {
        let out = tmp.path().join(name);
        let mut args = vec!["experiment", cfg, "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = antextrap(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        (
            fs::read_to_string(out.join("scatter.csv")).unwrap(),
            fs::read_to_string(out.join("residual_trace.csv")).unwrap(),
        )
    };
    let one = run("one", &["--threads", "1"]);
    let many = run("many", &["--threads", "4"]);
    assert_eq!(one, many);

    let subset = run("subset", &["--first-trial", "3", "--trials", "3"]);
    let full_rows: Vec<&str> = one.0.lines().skip(1).filter(|l| l.split(',').next().unwrap().parse::<usize>().unwrap() >= 3).collect();
    let sub_rows: Vec<&str> = subset.0.lines().skip(1).collect();
    assert_eq!(full_rows, sub_rows);
}

#[test]
fn extrapolate_round_trip_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    // Observations of a 1×2 array with gap 0.3λ, both ports driven equally.
    let mut args: Vec<String> = [
        "simulate", "--model", "rect", "--rows", "1", "--cols", "2", "--config", "0.3",
        "--amp", "0.7071067811865476,0", "--amp", "0.7071067811865476,0", "--format", "json",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for i in 0..12 {
        args.push("--at".into());
        args.push(format!("{},0", -60.0 + 10.0 * i as f64));
    }
    let o = antextrap(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(o.status.success(), "{}", stderr(&o));
    let pattern = tmp.path().join("p.json");
    fs::write(&pattern, stdout(&o)).unwrap();
    let result = tmp.path().join("r.json");
    let o = antextrap(&[
        "extrapolate", "--model", "rect", "--rows", "1", "--cols", "2", "--pattern", pattern.to_str().unwrap(),
        "--step", "30", "--iterations", "30", "--out", result.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&result).unwrap()).unwrap();
    let gap = r["config"][0].as_f64().unwrap();
    assert!((gap - 0.3).abs() < 1e-4, "fitted gap {gap}");
    let hist = r["residual_history"].as_array().unwrap();
    assert!(hist.last().unwrap().as_f64().unwrap() < 1e-4);
}

#[test]
fn order_scan_csv_header() {
    let tmp = tempfile::tempdir().unwrap();
    let pattern = tmp.path().join("p.json");
    let pts: Vec<String> = (0..20)
        .map(|i| format!(r#"{{"azimuth": {}, "elevation": {}}}"#, -1.0 + 0.1 * i as f64, 0.02 * i as f64))
        .collect();
    let vals: Vec<&str> = (0..20).map(|_| "[1.0, 0.0]").collect();
    fs::write(
        &pattern,
        format!(r#"{{"kind": "complex", "points": [{}], "values": [{}]}}"#, pts.join(","), vals.join(",")),
    )
    .unwrap();
    let o = antextrap(&[
        "order-scan", "--pattern", pattern.to_str().unwrap(), "--max-rows", "2", "--max-cols", "2", "--iterations", "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "trial,rows,cols,min_residual,selected");
    assert_eq!(lines.len(), 5);
    // A single element already reproduces a constant pattern.
    assert!(lines[1].starts_with("0,1,1,") && lines[1].ends_with(",true"), "{out}");
}
