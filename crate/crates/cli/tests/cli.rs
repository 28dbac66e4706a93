use std::path::Path;
use std::process::{Command, Output};

use msrec_core::io::{load_binary, save_binary};
use msrec_core::metrics::{compute_report, MetricsReport, MetricsSettings};
use msrec_harness::SpherePack;

fn msrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msrec"))
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

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn plan_reports_two_stages() {
    let o = msrec(&[
        "plan",
        "--lr-scale",
        "9.4",
        "--hr-scale",
        "2.35",
        "--hr-size",
        "256",
        "--lr-size",
        "64",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(
        stdout(&o).lines().any(|l| l == "n_max=2 m_max=2"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn missing_config_is_reported() {
    let o = msrec(&["pipeline", "--config", "missing.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("config not found"), "{}", stderr(&o));
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(msrec(&["plan", "--lr-scale", "abc"]).status.code(), Some(2));
    assert_eq!(msrec(&["reconstruct"]).status.code(), Some(2));
    assert_eq!(msrec(&["plan", "--lr-scale", "9.4"]).status.code(), Some(2));
}

#[test]
fn domain_and_io_errors_have_their_own_codes() {
    let o = msrec(&[
        "plan",
        "--lr-scale",
        "2.35",
        "--hr-scale",
        "9.4",
        "--hr-size",
        "256",
        "--lr-size",
        "64",
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let o = msrec(&["metrics", "--input", "no_such_volume.raw"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn metrics_matches_library() {
    let tmp = tempfile::tempdir().unwrap();
    let v = SpherePack {
        dims: [24, 24, 24],
        grain_radius: [3.0, 4.0],
        micropores: 10,
        ..SpherePack::default()
    }
    .generate_binary()
    .unwrap();
    let raw = tmp.path().join("fixture.raw");
    save_binary(&v, &raw).unwrap();
    let clobber = msrec(&["metrics", "--input", path(&raw), "--out", path(tmp.path())]);
    assert_eq!(clobber.status.code(), Some(2), "{}", stderr(&clobber));
    let reports = tmp.path().join("reports");
    let o = msrec(&["metrics", "--input", path(&raw), "--out", path(&reports)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cli = MetricsReport::from_json(&stdout(&o)).unwrap();
    let lib = compute_report(
        &load_binary(&raw).unwrap(),
        "fixture",
        &MetricsSettings::default(),
    )
    .unwrap();
    assert_eq!(cli, lib);
    assert_eq!(stdout(&o).trim_end(), lib.to_json().unwrap());
    assert!(reports.join("fixture.csv").is_file());
}

#[test]
fn stepwise_commands_chain() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(
        &cfg,
        "seed = 5\n[simulation]\ncut = [40, 40, 40]\nfactor = 4\n[simulation.sphere_pack]\ndims = [40, 40, 80]\ngrain_radius = [3.0, 5.0]\nmicropores = 40\n",
    )
    .unwrap();
    let d = |rel: &str| tmp.path().join(rel).to_str().unwrap().to_string();
    let steps: Vec<Vec<String>> = vec![
        vec![
            "simulate-pair".into(),
            "--config".into(),
            d("c.toml"),
            "--out".into(),
            d("pair"),
        ],
        vec![
            "build-dicts".into(),
            "--hr".into(),
            d("pair/hr.raw"),
            "--lr".into(),
            d("pair/lr.raw"),
            "--out".into(),
            d("dicts"),
        ],
        vec![
            "reconstruct".into(),
            "--lr".into(),
            d("pair/lr.raw"),
            "--dicts".into(),
            d("dicts"),
            "--out".into(),
            d("out"),
            "--seed".into(),
            "1".into(),
        ],
        vec![
            "pad".into(),
            "--pms".into(),
            d("out/pms_2.raw"),
            "--dicts".into(),
            d("dicts"),
            "--out".into(),
            d("out"),
        ],
    ];
    for args in &steps {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = msrec(&args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    }
    let lr = load_binary(d("pair/lr.raw")).unwrap();
    assert!((lr.scale() - 9.4).abs() < 1e-12);
    let pms = load_binary(d("out/pms_2.raw")).unwrap();
    assert_eq!(pms.dims(), [37, 37, 37]);
    let ms = load_binary(d("out/ms.raw")).unwrap();
    assert!(ms.pore_count() >= pms.pore_count());
}

#[test]
fn pipeline_flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(
        &cfg,
        "[simulation]\ncut = [32, 32, 32]\nfactor = 4\n[simulation.sphere_pack]\ndims = [32, 32, 64]\ngrain_radius = [3.0, 4.0]\nmicropores = 10\n",
    )
    .unwrap();
    let out = tmp.path().join("run");
    let o = msrec(&[
        "pipeline",
        "--config",
        path(&cfg),
        "--seed",
        "8",
        "--baseline",
        "--repeats",
        "2",
        "--out",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let copy = std::fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(copy.contains("seed = 8"));
    for dir in ["multi/repeat_1", "single/repeat_1"] {
        assert!(out.join(dir).join("ms.raw").is_file(), "{dir}");
    }
    let again = msrec(&["pipeline", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(again.status.code(), Some(3));
}
