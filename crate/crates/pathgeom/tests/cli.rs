use std::process::{Command, Output};

fn pathgeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathgeom"))
        .args(args)
        .env_remove("PATHGEOM_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn definitive_verdict_exits_zero() {
    let o = pathgeom(&["classify", "3*(y''')^2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: VariationalNotMetric"));
    // Timings go to stderr only.
    assert!(!stdout(&o).contains("timing"));
}

#[test]
fn input_errors_exit_one() {
    for args in [
        &["classify", "y''''' +"][..],
        &["classify", "--file", "/nonexistent/ode.txt"],
        &["--bogus"],
        &["sr-ode", "--E=-1", "--F", "0", "--G", "1"],
        &["--samples", "2", "classify", "0"],
        &["el", "y'*y'' + x"],
    ] {
        let o = pathgeom(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn sampled_zero_is_withheld_under_strict() {
    let ode = "3*(y''')^2 + (exp(x)^2-exp(2*x))*y'''";
    assert_eq!(pathgeom(&["classify", ode]).status.code(), Some(0));
    let o = pathgeom(&["--strict", "--json", "classify", ode]);
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["verdict"].is_null());
    assert!(report["withheld"].is_string());
}

#[test]
fn json_is_reproducible() {
    let args = ["--json", "classify", "3*y''*(y''')^2/(1+(y'')^2)"];
    let (a, b) = (pathgeom(&args), pathgeom(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["verdict"], "SubRiemannian");
    assert_eq!(report["metric"]["E"], "1");
    assert_eq!(report["metric"]["F"], "0");
    assert_eq!(report["metric"]["G"], "1");
}

#[test]
fn seed_from_environment() {
    let run = |seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_pathgeom"));
        c.args(["--json", "classify", "y*y'''"]);
        match seed {
            Some(s) => c.env("PATHGEOM_SEED", s),
            None => c.env_remove("PATHGEOM_SEED"),
        };
        c.output().unwrap()
    };
    let a = run(Some("5"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, run(Some("5")).stdout);
    assert_eq!(run(None).status.code(), Some(0));
}

#[test]
fn equation_commands() {
    let o = pathgeom(&["el", "exp(-3*y'')"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "y'''' = 3*(y''')^2");
    let o = pathgeom(&["sr-ode", "--E", "1", "--F", "0", "--G", "1"]);
    assert_eq!(stdout(&o).trim(), "y'''' = 3*y''*(y''')^2/(1+(y'')^2)");
    let o = pathgeom(&["sr-frame", "--E", "1", "--F", "0", "--G", "1"]);
    assert!(stdout(&o).lines().any(|l| l == "K = 0"));
}

#[test]
fn geodesic_csv() {
    let args = [
        "geodesic", "--E", "1", "--F", "0", "--G", "1", "--xmult", "1", "--length", "1", "--step", "0.1",
    ];
    let (a, b) = (pathgeom(&args), pathgeom(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,x,y,z,x_mult"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    let last = rows.last().unwrap();
    assert!((last[0] - 1.0).abs() < 1e-12);
    assert!((last[1] - 1f64.sin()).abs() < 1e-5);
    assert!((last[3] - (1.0 - 1f64.cos())).abs() < 1e-5);
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("pathgeom-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let o = pathgeom(&["--json", "-o", path.to_str().unwrap(), "classify", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["verdict"], "VariationalDegenerate");
    std::fs::remove_dir_all(&dir).unwrap();
}
