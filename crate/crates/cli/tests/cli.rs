use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = r#"
[generate]
n_designs = 400

[surrogate]
folds = 3

[surrogate.forest]
n_trees = 20
max_depth = 8

[surrogate.boosting]
n_rounds = 40

[optimize]
frozen = ["handle_distance"]

[optimize.targets]
mass = { at_most = 100.0 }

[optimize.ga]
population_size = 16
generations = 5
sample_count = 4
"#;

struct Workspace {
    _dir: tempfile::TempDir,
    out: PathBuf,
    config: PathBuf,
}

fn workspace() -> Workspace {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("walker.toml");
    fs::write(&config, SMALL).unwrap();
    Workspace {
        out: dir.path().join("out"),
        config,
        _dir: dir,
    }
}

fn run(ws: &Workspace, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walker-forge"))
        .arg("--config")
        .arg(&ws.config)
        .args(args)
        .env("WALKER_FORGE_DIR", &ws.out)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn ok(ws: &Workspace, args: &[&str]) -> String {
    let o = run(ws, args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn fails(ws: &Workspace, args: &[&str]) -> String {
    let o = run(ws, args);
    assert!(!o.status.success(), "{args:?} unexpectedly succeeded");
    String::from_utf8(o.stderr).unwrap()
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let i = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[i].to_string()).collect()
}

fn summary_field(line: &str, key: &str) -> usize {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn generate_summary_and_determinism() {
    let ws = workspace();
    let line = ok(&ws, &["generate", "-n", "128"]);
    let (req, dropped, valid) = (
        summary_field(&line, "requested"),
        summary_field(&line, "dropped"),
        summary_field(&line, "valid"),
    );
    assert_eq!(req, 128);
    assert_eq!(valid, 128 - dropped);
    assert_eq!(line.trim(), format!("requested=128 dropped={dropped} valid={valid}"));
    let first = fs::read(ws.out.join("designs.csv")).unwrap();
    ok(&ws, &["generate", "-n", "128"]);
    assert_eq!(fs::read(ws.out.join("designs.csv")).unwrap(), first);
    let other = ok(&ws, &["--seed", "5", "generate", "-n", "128"]);
    assert!(other.starts_with("requested=128"));
}

#[test]
fn default_ranges_drop_some_but_not_all() {
    let ws = workspace();
    let line = ok(&ws, &["generate", "-n", "4096"]);
    let valid = summary_field(&line, "valid");
    let dropped = summary_field(&line, "dropped");
    assert!(valid > 0 && dropped > 0, "{line}");
}

#[test]
fn simulate_without_designs_fails() {
    let ws = workspace();
    let err = fails(&ws, &["simulate"]);
    assert!(err.contains("designs.csv"), "{err}");
}

#[test]
fn unknown_plot_target_fails() {
    let ws = workspace();
    let err = fails(&ws, &["plotdata", "mass", "wheel_size"]);
    assert!(err.contains("wheel_size"), "{err}");
}

#[test]
fn bad_config_names_the_field() {
    let ws = workspace();
    fs::write(&ws.config, "[generate]\nn_designs = 0\n").unwrap();
    let err = fails(&ws, &["generate"]);
    assert!(err.contains("generate.n_designs"), "{err}");
}

#[test]
fn stability_one_shot() {
    let ws = workspace();
    let out = ok(
        &ws,
        &["stability", "--mass", "7.5", "--leg-width", "22", "--handle-distance", "19", "--height", "35"],
    );
    let theta: f64 = out.split_whitespace().next().unwrap().strip_prefix("theta_deg=").unwrap().parse().unwrap();
    assert!((theta - 2.7914).abs() < 1e-3, "{out}");
    let out = ok(
        &ws,
        &[
            "stability", "--mass", "7.5", "--leg-width", "22", "--handle-distance", "19", "--height", "35",
            "--force-lbf", "0.01",
        ],
    );
    assert!(out.contains("status=no_tip"), "{out}");
    assert!(!fails(&ws, &["stability", "--mass", "-1", "--leg-width", "22", "--handle-distance", "19", "--height", "35"]).is_empty());
}

#[test]
fn locked_output_dir_is_refused() {
    let ws = workspace();
    fs::create_dir_all(&ws.out).unwrap();
    let lock = File::create(ws.out.join(".walker-forge.lock")).unwrap();
    lock.try_lock().unwrap();
    let err = fails(&ws, &["generate", "-n", "16"]);
    assert!(err.contains("in use"), "{err}");
    lock.unlock().unwrap();
    ok(&ws, &["generate", "-n", "16"]);
}

#[test]
fn pipeline_end_to_end() {
    let ws = workspace();
    ok(&ws, &["generate"]);

    let line = ok(&ws, &["--workers", "1", "simulate"]);
    let total = summary_field(&line, "total");
    assert_eq!(summary_field(&line, "simulated"), total);
    let dataset = ws.out.join("dataset.csv");
    let serial = fs::read(&dataset).unwrap();

    let line = ok(&ws, &["simulate"]);
    assert_eq!(summary_field(&line, "reused"), total, "{line}");
    assert_eq!(fs::read(&dataset).unwrap(), serial);

    let line = ok(&ws, &["--workers", "2", "--force", "simulate"]);
    assert_eq!(summary_field(&line, "reused"), 0, "{line}");
    assert_eq!(fs::read(&dataset).unwrap(), serial, "parallel output differs from serial");

    ok(&ws, &["train"]);
    let report = ws.out.join("r2_report.csv");
    assert_eq!(column(&report, "target").len(), 9);
    let first = fs::read(&report).unwrap();
    ok(&ws, &["evaluate"]);
    assert_eq!(fs::read(&report).unwrap(), first);

    ok(&ws, &["optimize"]);
    let cfs = ws.out.join("counterfactuals.csv");
    let hd = column(&cfs, "handle_distance_in");
    assert!(!hd.is_empty());
    assert!(hd.iter().all(|v| v.parse::<f64>().unwrap() == 19.0), "{hd:?}");

    let validation = ws.out.join("validation_report.csv");
    let mut r = csv::Reader::from_path(&validation).unwrap();
    let baseline_mass = r
        .records()
        .map(|r| r.unwrap())
        .find(|r| &r[0] == "baseline" && &r[1] == "mass")
        .unwrap();
    let m: f64 = baseline_mass[3].parse().unwrap();
    assert!((m - 7.5).abs() < 0.05, "baseline mass {m}");

    let line = ok(&ws, &["validate"]);
    assert!(line.starts_with(&format!("validated={}", hd.len())), "{line}");

    ok(&ws, &["plotdata"]);
    for f in ["scatter.csv", "kde.csv", "correlations.csv", "resolved_config.toml"] {
        assert!(ws.out.join(f).is_file(), "{f} missing");
    }
    let kinds = column(&ws.out.join("scatter.csv"), "kind");
    assert_eq!(kinds.iter().filter(|k| *k == "original").count(), 1);
    let dy = column(&ws.out.join("scatter.csv"), "abs_handle_dy_in");
    assert!(dy.iter().all(|v| v.parse::<f64>().unwrap() >= 0.0));
}

#[test]
fn readme_example_config_is_accepted() {
    let readme = include_str!("../../../README.md");
    let block = readme.split("```toml\n").nth(1).unwrap().split("```").next().unwrap();
    let ws = workspace();
    fs::write(&ws.config, block).unwrap();
    let line = ok(&ws, &["generate", "-n", "64"]);
    assert!(line.starts_with("requested=64"), "{line}");
}
