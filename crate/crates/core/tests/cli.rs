use std::path::Path;
use std::process::{Command, Output};

fn slosh(args: &[&str], dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_slosh"));
    cmd.args(args).env_remove("SLOSH_OUTPUT_DIR");
    if let Some(d) = dir {
        cmd.env("SLOSH_OUTPUT_DIR", d);
    }
    cmd.output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn lambda_star_prints_json() {
    let out = slosh(
        &[
            "lambda-star",
            "--geometry",
            "canal",
            "--alpha",
            "0",
            "--bond",
            "inf",
            "--area",
            "1",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["lambda_star"].as_f64(), Some(1.5));
    assert_eq!(v["ratio"].as_f64(), Some(1.0));

    let out = slosh(
        &["lambda-star", "--geometry", "radial", "--m", "0", "--bond", "1"],
        None,
    );
    let v = stdout_json(&out);
    assert!((v["ratio"].as_f64().unwrap() - 38.8).abs() < 0.2);
    assert!((v["d0"].as_f64().unwrap() - 0.5364).abs() < 1e-4);
}

#[test]
fn shape_then_solve_reproduces_lambda_star() {
    let dir = tempfile::tempdir().unwrap();
    let out = slosh(
        &[
            "shape",
            "--geometry",
            "radial",
            "--m",
            "1",
            "--bond",
            "2",
            "--n",
            "801",
            "--output",
            "shape.csv",
        ],
        Some(dir.path()),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let shape = dir.path().join("shape.csv");
    assert!(std::fs::read_to_string(&shape).unwrap().starts_with("r,h\n"));

    let star = stdout_json(&slosh(
        &["lambda-star", "--geometry", "radial", "--m", "1", "--bond", "2"],
        None,
    ))["lambda_star"]
        .as_f64()
        .unwrap();
    let out = slosh(
        &["solve", "--shape", shape.to_str().unwrap(), "--m", "1", "--bond", "2"],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["lambda1"].as_f64().unwrap() / star - 1.0).abs() < 1e-4);

    let out = slosh(
        &[
            "solve",
            "--shape",
            shape.to_str().unwrap(),
            "--m",
            "1",
            "--bond",
            "2",
            "-o",
            "mode.csv",
        ],
        Some(dir.path()),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("mode.csv")).unwrap();
    assert!(text.starts_with("omega1,lambda1,residual,n\n"));
    assert!(text.lines().nth(2) == Some("r,psi,zeta"));
}

#[test]
fn sweep_and_fit() {
    let out = slosh(
        &["sweep", "--geometry", "canal", "--alpha", "3.14159", "--points", "20"],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("bond,lambda_star,ratio\n"));
    assert_eq!(text.lines().count(), 21);

    let out = slosh(
        &[
            "fit",
            "--geometry",
            "radial",
            "--m",
            "1",
            "--window",
            "0.1",
            "10",
            "--expect",
            "-0.86",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let out = slosh(&["fit", "--geometry", "radial", "--m", "1", "--expect", "-0.5"], None);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn verify_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = slosh(
        &[
            "verify",
            "isoperimetric",
            "--geometry",
            "canal",
            "--bond",
            "1",
            "--trials",
            "5",
            "--n",
            "401",
            "-o",
            "iso.csv",
        ],
        Some(dir.path()),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("iso.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], serde_json::Value::Bool(true));
    assert_eq!(json["trials"].as_array().unwrap().len(), 5);
    let csv = std::fs::read_to_string(dir.path().join("iso.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);

    let out = slosh(
        &["verify", "optimality", "--geometry", "radial", "--m", "0", "--n", "400"],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let out = slosh(
        &["verify", "attainment", "--geometry", "canal", "--grids", "100,200,400"],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        slosh(&["lambda-star", "--geometry", "canal", "--bond", "-1"], None)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        slosh(&["lambda-star", "--geometry", "box"], None).status.code(),
        Some(2)
    );
    assert_eq!(
        slosh(&["lambda-star", "--geometry", "radial", "--m", "3"], None)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        slosh(&["solve", "--shape", "/nonexistent/shape.csv"], None)
            .status
            .code(),
        Some(3)
    );

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,h\n-1,0.5\n0,-0.2\n1,0.5\n").unwrap();
    assert_eq!(
        slosh(&["solve", "--shape", bad.to_str().unwrap()], None).status.code(),
        Some(2)
    );

    let dry = dir.path().join("dry.csv");
    std::fs::write(&dry, "x,h\n-1,1\n-0.5,1\n0,0\n0.5,0\n1,1\n").unwrap();
    assert_eq!(
        slosh(&["solve", "--shape", dry.to_str().unwrap()], None).status.code(),
        Some(4)
    );

    let descending = slosh(&["verify", "limits", "--geometry", "canal", "--bonds", "1e6,1e4"], None);
    assert_eq!(descending.status.code(), Some(2));
    let far = slosh(&["verify", "limits", "--geometry", "canal", "--bonds", "1,2"], None);
    assert_eq!(far.status.code(), Some(5));
}
