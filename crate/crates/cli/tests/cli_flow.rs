//! End-to-end CLI behavior on a tiny synthetic dataset.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use meltkit_core::series::{Manifest, ManifestEntry, Stream};

fn meltkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meltkit"))
        .args(args)
        .output()
        .expect("spawning meltkit")
}

fn run_ok(args: &[&str]) -> String {
    let out = meltkit(args);
    assert!(
        out.status.success(),
        "meltkit {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tiny_dataset(dir: &Path) -> (PathBuf, PathBuf) {
    let root = dir.join("data");
    let split = dir.join("split.json");
    run_ok(&[
        "gen-synth",
        "--root",
        root.to_str().unwrap(),
        "--seed",
        "7",
        "--width",
        "96",
        "--height",
        "64",
        "--years",
        "2019",
        "--revisit-days",
        "6",
    ]);
    run_ok(&[
        "make-split",
        "--root",
        root.to_str().unwrap(),
        "--seed",
        "7",
        "--out",
        split.to_str().unwrap(),
    ]);
    (root, split)
}

#[test]
fn self_evaluation_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let (root, split) = tiny_dataset(dir.path());

    // Copy the targets into a prediction directory, so the model under
    // evaluation is the reference itself.
    let pred_dir = dir.path().join("preds");
    std::fs::create_dir_all(pred_dir.join("prediction")).unwrap();
    let manifest = Manifest::load(&root).unwrap();
    let targets = manifest.series(&root, Stream::SarTarget).unwrap();
    let mut entries = Vec::new();
    for entry in targets.entries() {
        let path = format!("prediction/{}.mwbr", entry.date);
        std::fs::copy(&entry.path, pred_dir.join(&path)).unwrap();
        entries.push(ManifestEntry {
            stream: Stream::Prediction,
            date: entry.date,
            path,
            grid: targets.grid(),
            acquired_at: None,
        });
    }
    Manifest::new(entries).save(&pred_dir).unwrap();

    let eval_dir = dir.path().join("eval");
    let stdout = run_ok(&[
        "evaluate",
        "--root",
        root.to_str().unwrap(),
        "--split",
        split.to_str().unwrap(),
        "--set",
        "test",
        "--pred-dir",
        pred_dir.to_str().unwrap(),
        "--model-name",
        "self",
        "--out-dir",
        eval_dir.to_str().unwrap(),
    ]);
    assert!(stdout.contains("self"));

    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(eval_dir.join("report.json")).unwrap()).unwrap();
    let m = &report["metrics"];
    assert_eq!(m["mae"], 0.0);
    assert_eq!(m["accuracy"], 1.0);
    assert_eq!(m["ssim"], 1.0);
    assert_eq!(m["f1"], 1.0);
    assert_eq!(m["psnr_db"], "inf");
}

#[test]
fn fit_evaluate_reports_are_thread_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let (root, split) = tiny_dataset(dir.path());
    let params = dir.path().join("rm.json");
    run_ok(&[
        "fit",
        "--root",
        root.to_str().unwrap(),
        "--split",
        split.to_str().unwrap(),
        "--model",
        "running_mean_sar",
        "--out",
        params.to_str().unwrap(),
    ]);

    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let eval_dir = dir.path().join(format!("eval_t{threads}"));
        run_ok(&[
            "evaluate",
            "--root",
            root.to_str().unwrap(),
            "--split",
            split.to_str().unwrap(),
            "--set",
            "test",
            "--params",
            params.to_str().unwrap(),
            "--out-dir",
            eval_dir.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        outputs.push(std::fs::read(eval_dir.join("report.json")).unwrap());
    }
    assert_eq!(
        outputs[0], outputs[1],
        "thread count changed the report bytes"
    );

    // The #p column for the running-mean model is 1.
    let report: serde_json::Value = serde_json::from_slice(&outputs[0]).unwrap();
    assert_eq!(report["param_count"], 1);
}

#[test]
fn daily_product_cardinality_and_event_spike() {
    let dir = tempfile::tempdir().unwrap();
    let (root, split) = tiny_dataset(dir.path());
    let params = dir.path().join("pmw.json");
    run_ok(&[
        "fit",
        "--root",
        root.to_str().unwrap(),
        "--split",
        split.to_str().unwrap(),
        "--model",
        "threshold_pmw",
        "--out",
        params.to_str().unwrap(),
    ]);

    let daily = dir.path().join("daily");
    run_ok(&[
        "daily-product",
        "--root",
        root.to_str().unwrap(),
        "--model",
        "threshold_pmw",
        "--params",
        params.to_str().unwrap(),
        "--from",
        "2019-06-08",
        "--to",
        "2019-06-14",
        "--out-dir",
        daily.to_str().unwrap(),
    ]);

    let rasters: Vec<_> = std::fs::read_dir(daily.join("prediction"))
        .unwrap()
        .collect();
    assert_eq!(rasters.len(), 7);
    let csv = std::fs::read_to_string(daily.join("extent.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "date,area_km2");
    assert_eq!(lines.len(), 8);

    // The planted June 12 event shows as a sharp extent increase.
    let area = |date: &str| -> f64 {
        lines
            .iter()
            .find(|l| l.starts_with(date))
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    let before = area("2019-06-11");
    let event = area("2019-06-12");
    assert!(
        event > 1.3 * before.max(1e-9),
        "event day extent {event} km^2 vs prior day {before} km^2"
    );
}

#[cfg(unix)]
#[test]
fn external_identity_returns_the_first_channel() {
    use std::os::unix::fs::PermissionsExt;

    let dir = tempfile::tempdir().unwrap();
    let (root, split) = tiny_dataset(dir.path());

    let script = dir.path().join("identity.sh");
    std::fs::write(&script, "#!/bin/sh\ncp \"$1/in_00.mwbr\" \"$1/out.mwbr\"\n").unwrap();
    std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();

    let out_dir = dir.path().join("ext");
    run_ok(&[
        "predict",
        "--root",
        root.to_str().unwrap(),
        "--split",
        split.to_str().unwrap(),
        "--dates",
        "2019-06-09",
        "--model",
        "external",
        "--exec",
        script.to_str().unwrap(),
        "--no-preprocess",
        "--tile",
        "48",
        "--stride",
        "32",
        "--erode",
        "8",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);

    // Identity over channel 0 must reproduce the landmasked MAR input.
    let manifest = Manifest::load(&root).unwrap();
    let mar = manifest
        .series(&root, Stream::MarWa1)
        .unwrap()
        .load("2019-06-09".parse().unwrap())
        .unwrap();
    let landmask = manifest
        .series(&root, Stream::Landmask)
        .unwrap()
        .load_static()
        .unwrap();
    let expected = meltkit_core::apply_landmask(&mar, &landmask).unwrap();
    let got = meltkit_core::mwbr::load_raster(&out_dir.join("prediction/2019-06-09.mwbr")).unwrap();
    assert!(got.bits_eq(&expected));
}

#[test]
fn derive_sar_builds_targets_from_backscatter() {
    use meltkit_core::raster::{Grid, Raster};

    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("sar");
    std::fs::create_dir_all(root.join("backscatter")).unwrap();

    // One orbit group chained at the 12-day repeat cycle from December to
    // June; the winter scenes sit at -10 dB, the last scene dips 4 dB below
    // over its northern half.
    let grid = Grid::new(20, 20, 10.0).unwrap();
    let mut entries = Vec::new();
    let start: chrono::NaiveDateTime = "2018-12-20T06:00:00".parse().unwrap();
    let links = 15;
    for i in 0..links {
        let acquired = start + chrono::Duration::days(12 * i as i64);
        let raster = if i + 1 < links {
            Raster::filled(grid, -10.0)
        } else {
            Raster::from_fn(grid, |r, _| if r < 10 { -14.0 } else { -10.5 })
        };
        let path = format!("backscatter/{i:02}.mwbr");
        meltkit_core::mwbr::save_raster(&root.join(&path), &raster).unwrap();
        entries.push(ManifestEntry {
            stream: Stream::Backscatter,
            date: acquired.date(),
            path,
            grid,
            acquired_at: Some(acquired),
        });
    }
    Manifest::new(entries).save(&root).unwrap();

    run_ok(&["derive-sar", "--root", root.to_str().unwrap()]);

    let manifest = Manifest::load(&root).unwrap();
    let targets = manifest.series(&root, Stream::SarTarget).unwrap();
    // In-season scenes: Apr 7 and 19, May 1, 13, and 25, June 6.
    assert_eq!(targets.len(), 6);
    let last = targets.load("2019-06-06".parse().unwrap()).unwrap();
    assert_eq!(last.grid(), Grid::new(2, 2, 100.0).unwrap());
    assert_eq!(last.get(0, 0), 1.0);
    assert_eq!(last.get(0, 1), 1.0);
    assert_eq!(last.get(1, 0), 0.0);
    assert_eq!(last.get(1, 1), 0.0);
}

#[test]
fn exit_codes_distinguish_config_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (root, split) = tiny_dataset(dir.path());

    // Missing dataset root is a configuration error.
    let out = meltkit(&[
        "evaluate",
        "--root",
        dir.path().join("nope").to_str().unwrap(),
        "--split",
        split.to_str().unwrap(),
        "--params",
        "x.json",
        "--out-dir",
        dir.path().join("e").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // A gap in a daily input stream is a data error naming the date.
    let params = dir.path().join("mar.json");
    run_ok(&[
        "fit",
        "--root",
        root.to_str().unwrap(),
        "--split",
        split.to_str().unwrap(),
        "--model",
        "interpolate_mar",
        "--out",
        params.to_str().unwrap(),
        "--fit-sample",
        "2",
        "--mar-kernels",
        "5",
        "--mar-sigmas",
        "2",
        "--mar-gammas",
        "1",
        "--mar-brightness",
        "120",
    ]);
    let out = meltkit(&[
        "daily-product",
        "--root",
        root.to_str().unwrap(),
        "--model",
        "interpolate_mar",
        "--params",
        params.to_str().unwrap(),
        "--from",
        "2019-03-30",
        "--to",
        "2019-04-02",
        "--out-dir",
        dir.path().join("daily").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("mar_wa1") && stderr.contains("2019-03-30"),
        "unexpected stderr: {stderr}"
    );
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let (root, split) = tiny_dataset(dir.path());
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        serde_json::to_string(&serde_json::json!({
            "root": root,
            "split": split,
            "seed": 7,
        }))
        .unwrap(),
    )
    .unwrap();
    let params = dir.path().join("rm.json");
    run_ok(&[
        "--config",
        cfg.to_str().unwrap(),
        "fit",
        "--model",
        "running_mean_sar",
        "--out",
        params.to_str().unwrap(),
    ]);
    let file: serde_json::Value = serde_json::from_slice(&std::fs::read(&params).unwrap()).unwrap();
    assert_eq!(file["model"], "running_mean_sar");
    assert_eq!(file["provenance"]["seed"], 7);
}
