use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use coupled_tops::cli::manifest::{verify_outputs, RunManifest, MANIFEST_NAME};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coupled-tops"))
        .args(args)
        .env_remove("COUPLED_TOPS_OUT")
        .env_remove("COUPLED_TOPS_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn read_manifest(dir: &Path) -> RunManifest {
    serde_json::from_slice(&fs::read(dir.join(MANIFEST_NAME)).unwrap()).unwrap()
}

#[test]
fn version_names_the_build() {
    let o = run(&["--version"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("coupled-tops "));
}

#[test]
fn symmetry_report_lists_blocks() {
    let o = run(&["verify", "symmetry", "--two-j", "4", "--lambda", "0.3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<Vec<String>> = stdout(&o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    let summary: Vec<(&str, &str, &str, &str)> =
        rows.iter().map(|r| (r[0].as_str(), r[1].as_str(), r[2].as_str(), r[3].as_str())).collect();
    assert_eq!(
        summary,
        vec![("pp", "9", "BDI", "1"), ("pm", "6", "AI", "0"), ("mp", "4", "BDI", "0"), ("mm", "6", "AI", "0")]
    );
    for r in &rows {
        for field in &r[4..] {
            if !field.is_empty() {
                assert!(field.parse::<f64>().unwrap() < 1e-12);
            }
        }
    }
}

#[test]
fn predicted_gap_endpoints() {
    let o = run(&["rmt", "predict", "--class", "bdi1", "--curve", "gap", "--points", "31"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let values: Vec<(f64, f64)> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| {
            let (e, v) = l.split_once(',').unwrap();
            (e.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(values.len(), 31);
    assert_eq!(values[0], (0.0, 0.0));
    let expected = 1.0 - (-9.0 * std::f64::consts::PI.powi(2) / 8.0).exp();
    assert!((values[30].1 - expected).abs() < 1e-12);
}

#[test]
fn unknown_flag_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o =
        run(&["rmt", "predict", "--class", "ci", "--curve", "d", "--colour", "red", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--colour"));
    assert!(!out.exists());
}

#[test]
fn out_of_range_coupling_is_rejected() {
    let o = run(&["classical", "poincare", "--lambda", "1.2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).is_empty());
}

#[test]
fn ensemble_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.txt");
    fs::write(&config, "# small sweep\nlambda = 0.3\nj_min = 12\nj_max = 14\nblocks = pp, mp, pm\n").unwrap();
    let out = dir.path().join("run");
    let o = run(&["quantum", "ensemble", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = read_manifest(&out);
    assert_eq!(manifest.subcommand, "quantum ensemble");
    assert!(manifest.tasks.iter().all(|t| t.ok));
    let mut names: Vec<&str> = manifest.outputs.iter().map(|f| f.path.as_str()).collect();
    names.sort();
    assert_eq!(names.len(), 4, "{names:?}");
    assert!(names.iter().all(|n| n.starts_with("ensemble_lambda") && n.ends_with(".csv")));
    assert!(verify_outputs(&out, &manifest).unwrap().is_empty());
    let csv = fs::read_to_string(out.join(names[0])).unwrap();
    assert_eq!(
        csv.lines().find(|l| !l.starts_with('#')).unwrap(),
        "e,delta_n_empirical,delta_n_prediction,gap_empirical,gap_prediction"
    );
}

#[test]
fn invalid_config_reports_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.txt");
    fs::write(&config, "lambda = 0.2, 1.2\nj_min = 3\nj_max = 2\nflavour = up\n").unwrap();
    let out = dir.path().join("run");
    let o = run(&["quantum", "ensemble", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 1") && err.contains("line 4") && err.contains("j_min"), "{err}");
    assert!(!out.join(MANIFEST_NAME).exists());
}

#[test]
fn edited_output_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run(&["rmt", "sample", "--ensemble", "goe", "--count", "50", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = read_manifest(&out);
    assert_eq!(manifest.outputs.len(), 1);
    let name = &manifest.outputs[0].path;
    fs::write(out.join(name), "tampered\n").unwrap();
    assert_eq!(verify_outputs(&out, &manifest).unwrap(), vec![name.clone()]);
}
