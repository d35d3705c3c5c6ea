use std::path::Path;
use std::process::{Command, Output};

use dadg::data::load_csv_dataset;
use dadg::report::load_json_report;

fn dadg(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dadg"))
        .args(args)
        .env("DADG_OUT_DIR", out_dir)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const TINY: &[&str] = &[
    "--dataset.family",
    "rotated_moons",
    "--dataset.samples_per_domain=40",
    "--hyper.iterations",
    "3",
    "--arch.extractor_hidden=[]",
    "--arch.feature_dim=4",
    "--arch.disc_hidden=[4]",
];

fn results_json(dir: &Path) -> std::path::PathBuf {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "json"))
        .expect("a json table was written")
}

#[test]
fn unknown_key_exits_one_and_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dadg(&["experiment", "--hyper.gama", "0"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("hyper.gama"), "{}", stderr(&o));
}

#[test]
fn bad_values_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["experiment", "--hyper.gamma", "fast"][..],
        &["experiment", "--run.protocol", "vlcs_80_20"],
        &["experiment", "--run.targets=[\"nowhere\"]"],
        &["train", "--variant", "dadg", "--target", "rot0", "--run.variants"],
    ] {
        let o = dadg(args, tmp.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn missing_files_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("absent.toml");
    let o = dadg(&["experiment", "--config", missing.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let o = dadg(&["report", "--input", missing.to_str().unwrap(), "--out-dir", "x"], tmp.path());
    assert_eq!(o.status.code(), Some(3));

    let garbage = tmp.path().join("garbage.json");
    std::fs::write(&garbage, "{not json").unwrap();
    let o = dadg(&["report", "--input", garbage.to_str().unwrap(), "--out-dir", "x"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn gen_data_writes_a_loadable_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("data");
    let o = dadg(&["gen-data", "--out", out.to_str().unwrap(), "--dataset.samples_per_domain", "50"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let ds = load_csv_dataset(&out).unwrap();
    assert_eq!(ds.domain_names(), vec!["reversed", "src_a", "src_b", "src_c"]);
    assert!(ds.domains().iter().all(|d| d.len() == 50));
}

#[test]
fn check_grads_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dadg(&["check-grads", "--seed", "2"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 10);
}

#[test]
fn train_then_report_re_emits_the_table() {
    let tmp = tempfile::tempdir().unwrap();
    let runs = tmp.path().join("runs");
    let mut args = vec!["train", "--variant", "dadg", "--target", "rot40", "--seed", "3"];
    args.extend(TINY);
    args.extend(["--hyper.gamma", "0"]);
    let o = dadg(&args, &runs);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("| dadg |"));

    let json = results_json(&runs);
    let table = load_json_report(&json).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!((table.rows[0].target.as_str(), table.rows[0].seed), ("rot40", 3));
    assert_eq!(table.metadata.config.hyper.gamma, 0.0);
    let curves = std::fs::read_dir(&runs).unwrap().filter(|e| {
        e.as_ref().unwrap().file_name().to_string_lossy().starts_with("curve_")
    });
    assert_eq!(curves.count(), 1);

    let again = tmp.path().join("again");
    let o = dadg(
        &["report", "--input", json.to_str().unwrap(), "--out-dir", again.to_str().unwrap(), "--format", "csv,markdown"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let names: Vec<String> =
        std::fs::read_dir(&again).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert_eq!(names.len(), 2);
    let csv = names.iter().find(|n| n.ends_with(".csv")).unwrap();
    assert_eq!(std::fs::read_to_string(again.join(csv)).unwrap(), table.to_csv());
}

#[test]
fn explicit_out_dir_overrides_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let (env_dir, flag_dir) = (tmp.path().join("env"), tmp.path().join("flag"));
    let mut args = vec!["experiment", "--jobs", "2"];
    args.extend(TINY);
    let flag = format!("--run.out_dir={}", flag_dir.display());
    args.extend(["--run.variants=[\"deepall\"]", "--run.seeds=[1]", &flag]);
    let o = dadg(&args, &env_dir);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!env_dir.exists());
    let table = load_json_report(&results_json(&flag_dir)).unwrap();
    assert_eq!(table.rows.len(), 4);
    assert_eq!(table.metadata.config.run.jobs, 2);
}
