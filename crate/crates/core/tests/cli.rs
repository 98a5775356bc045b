use std::path::Path;
use std::process::Command;

use depthlab::cli::run;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["depthlab"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn square_depth() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "pts.csv", "x,y\n1,1\n1,-1\n-1,1\n-1,-1\n");
    let (code, out, _) = call(&["depth", "--input", &pts, "--point", "0,0"]);
    assert_eq!(code, 0);
    assert_eq!(out, "{\"count\":2,\"n\":4,\"depth\":0.5}\n");
    let (_, out, _) = call(&["depth", "--input", &pts, "--point", "0.1,0"]);
    assert_eq!(out, "{\"count\":1,\"n\":4,\"depth\":0.25}\n");
}

#[test]
fn triangle_median() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "tri.csv", "x,y\n0,0\n1,0\n0,1\n");
    let (code, out, _) = call(&["median", "--input", &pts]);
    assert_eq!(code, 0);
    assert!(
        out.starts_with("{\"median\":[0.3333333333333333,0.3333333333333333],\"set\":{\"kind\":\"polygon\""),
        "{out}"
    );
}

#[test]
fn contour_lines_are_nested() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "pts.csv", "x,y\n1,1\n1,-1\n-1,1\n-1,-1\n");
    let (code, out, _) = call(&["contour", "--input", &pts, "--levels", "1,2"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].contains("\"kind\":\"polygon\""));
    assert_eq!(lines[1], "{\"level\":2,\"n\":4,\"region\":{\"kind\":\"point\",\"vertices\":[[0.0,0.0]]}}");
}

#[test]
fn sample_is_reproducible_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(
        dir.path(),
        "model.json",
        r#"{"mu":[1,2],"shape":[[2,0.5],[0.5,1]],"radial":{"kind":"student_t","nu":3}}"#,
    );
    let (c1, a, _) = call(&["sample", "--model", &model, "--n", "100", "--seed", "7"]);
    let (c2, b, _) = call(&["sample", "--model", &model, "--n", "100", "--seed", "7"]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 101);
    let pts = write(dir.path(), "s.csv", &a);
    let cloud = depthlab::io::read_cloud_path(Path::new(&pts)).unwrap();
    let again = depthlab::models::sample_elliptical(
        &depthlab::models::EllipticalModel::from_json(&std::fs::read_to_string(&model).unwrap()).unwrap(),
        100,
        7,
    )
    .unwrap();
    assert_eq!(cloud, again);
    let (code, _, _) = call(&["region", "--input", &pts, "--level", "10"]);
    assert_eq!(code, 0);
}

#[test]
fn contaminate_replaces_requested_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("a,b\n");
    for i in 0..20 {
        text.push_str(&format!("{},{}\n", i % 5, i / 5));
    }
    let pts = write(dir.path(), "pts.csv", &text);
    let out = dir.path().join("dirty.csv");
    let (code, _, err) = call(&[
        "contaminate", "--input", &pts, "--epsilon", "0.25", "--radius", "1000", "--seed", "3", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let dirty = depthlab::io::read_cloud_path(&out).unwrap();
    assert_eq!(dirty.iter().filter(|p| p[0] > 500.0).count(), 5);
}

#[test]
fn limit_writes_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("field.csv");
    let args = ["limit", "--directions", "32", "--radius", "2", "--spacing", "0.5", "--seed", "4"];
    let (code, summary, _) = call(&args);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert!(v["w_max"].as_f64().unwrap() <= 0.0);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", out.to_str().unwrap()]);
    assert_eq!(call(&with_out).0, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("z_x,z_y,w\n"));
    // 2 / 0.5 = 4 steps each way, points within radius 2
    let inside = (-4i32..=4).flat_map(|i| (-4i32..=4).map(move |j| i * i + j * j)).filter(|&r| r <= 16).count();
    assert_eq!(text.lines().count(), inside + 1);
}

#[test]
fn experiment_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"kind":"contamination_error","n_grid":[30,60],"reps":6,"seed":11,
            "plan":{"epsilon":0.1,"strategy":{"kind":"far_cluster","direction":[1,0],"radius":20}}}"#,
    );
    let mut files = Vec::new();
    for t in ["1", "3"] {
        let out = dir.path().join(format!("r{t}.csv"));
        let (code, _, err) = call(&["--threads", t, "experiment", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        files.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(files[0], files[1]);
    let text = String::from_utf8(files.remove(0)).unwrap();
    assert!(text.starts_with("# depthlab v0.1.0, config-hash="));
    assert!(text.lines().nth(1).unwrap() == "level,n,rep,param,metric,value");
}

#[test]
fn errors_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "pts.csv", "x,y\n0,0\n1,zz\n");
    let (code, _, err) = call(&["depth", "--input", &pts, "--point", "0,0"]);
    assert_eq!(code, 1);
    assert!(err.contains("line 3"), "{err}");
    let good = write(dir.path(), "good.csv", "x,y\n0,0\n1,1\n");
    assert_eq!(call(&["depth", "--input", &good, "--point", "0,0,0"]).0, 1);
    assert_eq!(call(&["depth", "--input", &good, "--pointt", "0,0"]).0, 2);
    assert_eq!(call(&["depth", "--input", &good, "--point", "zero"]).0, 2);
    assert_eq!(call(&["frobnicate"]).0, 2);
    let cfg = write(dir.path(), "cfg.json", r#"{"kind":"lower_bound","n_grid":[10],"reps":1,"seed":0,"bogus":1}"#);
    assert_eq!(call(&["experiment", "--config", &cfg]).0, 1);
    assert_eq!(call(&["--help"]).0, 0);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_depthlab");
    let st = Command::new(bin).args(["depth", "--nope"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(!st.stderr.is_empty());
    let st = Command::new(bin).args(["depth", "--input", "/nonexistent.csv", "--point", "0,0"]).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
}
