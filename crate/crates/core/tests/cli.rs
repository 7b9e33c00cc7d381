//! End-to-end runs of the `fuota` binary and its exit codes.

use std::fs;
use std::path::Path;
use std::process::Command;

fn fuota(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fuota")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

const SMALL: &str = r#"
[experiment]
name = "cli"
mode = "analysis"
runs = 2
schemes = [{ kind = "proposed", l = 7, m = 12, w = 300 }, { kind = "fixed_sf", sf = 12 }]
[layout]
recipients = 6
distance_bins = 3
[analysis]
distance_panels = 2
bin_order = 2
[sweep]
w = [100, 300]
l = [7]
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn verbs_write_outputs_and_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let base = dir.path().to_string_lossy().into_owned();
    for verb in ["analyze", "simulate", "sweep", "lifetime"] {
        let out = format!("{base}/{verb}");
        let (code, _, err) = fuota(&[verb, "--config", &cfg, "--out", &out, "--seed", "3", "--runs", "2"]);
        assert_eq!(code, 0, "{verb}: {err}");
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(format!("{out}/manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["seed"], 3);
        assert_eq!(manifest["verb"], verb);
    }
    let a = format!("{base}/analyze/per_distance.csv");
    let (code, stdout, _) = fuota(&["compare", &a, &a, "--tolerance", "0"]);
    assert_eq!(code, 0, "{stdout}");
    let s = format!("{base}/simulate/per_distance.csv");
    let (code, _, _) = fuota(&["compare", &a, &s, "--tolerance", "0"]);
    assert_eq!(code, 3);
}

#[test]
fn rerun_from_written_config_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let a_s = a.to_string_lossy();
    assert_eq!(fuota(&["simulate", "--config", &cfg, "--mode", "both", "--out", &a_s]).0, 0);
    let resolved = a.join("config.toml");
    assert_eq!(fuota(&["simulate", "--config", &resolved.to_string_lossy(), "--out", &b.to_string_lossy()]).0, 0);
    for f in ["per_distance.csv", "averages.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "e.toml", "");
    let (code, _, err) = fuota(&["analyze", "--config", &empty]);
    assert_eq!(code, 2);
    assert!(err.contains("experiment.name") && err.contains("experiment.mode"), "{err}");
    let typo = write(dir.path(), "t.toml", "[experiment]\nname='x'\nmode='analysis'\n[layout]\nradius=3\n");
    let (code, _, err) = fuota(&["analyze", "--config", &typo]);
    assert_eq!(code, 2);
    assert!(err.contains("radius"), "{err}");
    assert_eq!(fuota(&["analyze", "--config", "/nonexistent.toml"]).0, 2);
}

#[test]
fn incomplete_simulation_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "i.toml",
        "[experiment]\nname='i'\nmode='simulate'\nruns=1\nschemes=[{ kind = \"fixed_sf\", sf = 7 }]\n\
         [layout]\nrecipients=5\nradius_m=3000\n[simulation]\ncap_factor=1\n",
    );
    let out = dir.path().join("o");
    let (code, _, err) = fuota(&["simulate", "--config", &cfg, "--out", &out.to_string_lossy()]);
    assert_eq!(code, 4, "{err}");
    assert!(out.join("per_distance.csv").exists());
}
