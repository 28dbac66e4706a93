use std::fs;
use std::path::Path;

use msrec_core::io::save_binary;
use msrec_harness::config::RealConfig;
use msrec_harness::manifest::{hash_run_dir, read_manifest, run_digest, RunStatus};
use msrec_harness::pipeline::{sphere_pack_config, CONFIG_FILE};
use msrec_harness::{run_pipeline, HarnessError, Mode, PipelineConfig, SpherePack};

fn small_config(seed: u64) -> PipelineConfig {
    let pack = SpherePack {
        dims: [40, 40, 80],
        grain_radius: [3.0, 5.0],
        micropores: 40,
        ..SpherePack::default()
    };
    let mut cfg = sphere_pack_config(pack, [40, 40, 40], 4, seed);
    cfg.baseline = true;
    cfg.pad_to_multiple = true;
    cfg
}

fn assert_exists(dir: &Path, rel: &str) {
    assert!(dir.join(rel).is_file(), "missing {rel}");
}

#[test]
fn writes_every_documented_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let report = run_pipeline(&small_config(1), &out).unwrap();
    assert_eq!(report.stages, 2);
    for rel in [
        "config.toml",
        "plan.json",
        "inputs/hr.raw",
        "inputs/lr.raw",
        "inputs/reference.raw",
        "dicts/epd_level1.bin",
        "dicts/epd_level2.bin",
        "dicts/mpd.bin",
        "metrics/hr.json",
        "metrics/lr.csv",
        "metrics/reference.json",
        "comparison.json",
        "comparison.csv",
        "report.json",
        "timings.json",
        "manifest.json",
    ] {
        assert_exists(&out, rel);
    }
    for branch in ["multi", "single"] {
        for rel in [
            "pms_1.raw",
            "pms_2.raw",
            "ms.raw",
            "ms_padded.raw",
            "stages.json",
            "padding.json",
            "metrics/ms.csv",
        ] {
            assert_exists(&out, &format!("{branch}/repeat_0/{rel}"));
        }
    }
    let manifest = read_manifest(&out).unwrap();
    assert_eq!(manifest.status, RunStatus::Complete);
    assert_eq!(manifest.files, hash_run_dir(&out).unwrap());
    assert!(manifest.files.iter().all(|f| f.path != "timings.json"));

    let csv = fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert!(csv.starts_with("candidate,metric,reference,value,abs_delta,rel_delta\n"));
}

#[test]
fn replay_from_config_copy_is_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    run_pipeline(&small_config(4), &first).unwrap();
    let cfg = PipelineConfig::load(first.join(CONFIG_FILE)).unwrap();
    assert_eq!(cfg, small_config(4));
    let second = tmp.path().join("second");
    run_pipeline(&cfg, &second).unwrap();
    assert_eq!(
        hash_run_dir(&first).unwrap(),
        hash_run_dir(&second).unwrap()
    );
}

#[test]
fn seed_changes_output() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run_pipeline(&small_config(2), &a).unwrap();
    run_pipeline(&small_config(3), &b).unwrap();
    assert_ne!(
        run_digest(&hash_run_dir(&a).unwrap()),
        run_digest(&hash_run_dir(&b).unwrap())
    );
}

#[test]
fn failure_leaves_partial_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        mode: Mode::Real,
        real: Some(RealConfig {
            hr: tmp.path().join("missing_hr.raw"),
            lr: tmp.path().join("missing_lr.raw"),
            hr_scale_um: None,
            lr_scale_um: None,
        }),
        ..PipelineConfig::default()
    };
    let out = tmp.path().join("run");
    assert!(run_pipeline(&cfg, &out).is_err());
    let manifest = read_manifest(&out).unwrap();
    assert_eq!(manifest.status, RunStatus::Failed);
    assert!(manifest.error.is_some());
    assert!(manifest.files.iter().any(|f| f.path == "config.toml"));
}

#[test]
fn real_mode_compares_against_hr() {
    let tmp = tempfile::tempdir().unwrap();
    let pack = SpherePack {
        dims: [40, 40, 40],
        grain_radius: [3.0, 5.0],
        micropores: 20,
        ..SpherePack::default()
    };
    let hr = pack.generate_binary().unwrap();
    let lr = msrec_core::resample::downsample_binary(
        &SpherePack { seed: 7, ..pack }.generate_binary().unwrap(),
        4,
    )
    .unwrap();
    save_binary(&hr, tmp.path().join("hr.raw")).unwrap();
    save_binary(&lr, tmp.path().join("lr.raw")).unwrap();
    let cfg = PipelineConfig {
        mode: Mode::Real,
        real: Some(RealConfig {
            hr: tmp.path().join("hr.raw"),
            lr: tmp.path().join("lr.raw"),
            hr_scale_um: None,
            lr_scale_um: None,
        }),
        ..PipelineConfig::default()
    };
    let report = run_pipeline(&cfg, &tmp.path().join("run")).unwrap();
    assert_eq!(report.compared_against, "hr");
    assert!(report.reference.is_none());
    assert_eq!(report.runs.len(), 1);
}

#[test]
fn refuses_non_empty_output() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("keep.txt"), "x").unwrap();
    let err = run_pipeline(&small_config(0), tmp.path()).unwrap_err();
    assert!(matches!(err, HarnessError::OutputNotEmpty(_)));
    assert_eq!(
        fs::read_to_string(tmp.path().join("keep.txt")).unwrap(),
        "x"
    );
}
