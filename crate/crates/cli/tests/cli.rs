use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn zeno(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeno"))
        .args(args)
        .output()
        .expect("spawn zeno")
}

const SMALL: &str = r#"
label = "small"
[grid]
x_min = -40.0
x_max = 40.0
n = 512
[soliton]
v = -0.25
x0 = 10.0
[beam]
kind = "gaussian"
gamma = 100.0
w = 0.5
x_b = 0.0
[time]
dt = 0.02
t_final = 40.0
[observe]
snapshot_stride = 500
com_stride = 50
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn lists_every_figure() {
    let out = zeno(&["list-figures"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().collect();
    assert_eq!(names.len(), 12);
    assert!(names.contains(&"fig1") && names.contains(&"fig2j") && names.contains(&"fig3"));
}

#[test]
fn run_writes_dataset_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL);
    let out_dir = tmp.path().join("out");
    let out = zeno(&["--quiet", "--out", out_dir.to_str().unwrap(), "run", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    for f in [
        "summary.toml",
        "heatmap.csv",
        "survival.csv",
        "com.csv",
        "profiles.csv",
        "manifest.txt",
    ] {
        assert!(out_dir.join(f).is_file(), "missing {f}");
    }
    let summary = fs::read_to_string(out_dir.join("summary.toml")).unwrap();
    let p_refl: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("p_refl = "))
        .expect("p_refl line")
        .parse()
        .unwrap();
    assert!((0.0..=1.0).contains(&p_refl));

    let manifest = fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    assert_eq!(manifest.lines().count(), 5);
    assert!(manifest
        .lines()
        .all(|l| l.split_whitespace().next().unwrap().len() == 64));
}

#[test]
fn overrides_reach_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL);
    let out_dir = tmp.path().join("out");
    let out = zeno(&[
        "--quiet",
        "--grid-n",
        "256",
        "--out",
        out_dir.to_str().unwrap(),
        "run",
        &cfg,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(out_dir.join("summary.toml")).unwrap();
    assert!(summary.lines().any(|l| l == "config.grid.n = 256"));
}

#[test]
fn invalid_config_exits_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.toml", &SMALL.replace("w = 0.5", "w = -0.5"));
    let out = zeno(&["--out", tmp.path().join("o").to_str().unwrap(), "run", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beam.w"));

    let unknown = write(tmp.path(), "unknown.toml", &format!("{SMALL}\nbogus = 1\n"));
    assert_eq!(zeno(&["run", &unknown]).status.code(), Some(2));
}

#[test]
fn unknown_figure_is_a_config_error() {
    assert_eq!(zeno(&["figure", "fig9"]).status.code(), Some(2));
}

#[test]
fn sweep_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!(
        "{}\n[[sweep.axis]]\nparam = \"gamma\"\nvalues = [0.0, 100.0]\n",
        SMALL.replace("t_final = 40.0", "t_final = 20.0")
    );
    let cfg = write(tmp.path(), "sweep.toml", &text);
    let out_dir = tmp.path().join("out");
    let out = zeno(&["--quiet", "--out", out_dir.to_str().unwrap(), "sweep", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3, "header plus one row per cell");
}
