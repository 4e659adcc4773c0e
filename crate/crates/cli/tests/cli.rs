use std::path::{Path, PathBuf};
use std::process::Command;

use dcj_cli::output::sha256_hex;
use dcj_cli::{cmd_report, cmd_simulate, cmd_stationary, cmd_validate, cmd_verify, ErrorKind, Options};
use serde_json::{json, Value};
use tempfile::TempDir;

fn golden(name: &str) -> Value {
    let path = format!("{}/../../configs/golden/{name}.json", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, config: &Value) -> PathBuf {
    let path = dir.join("model.json");
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

/// Temporary directory holding `config`, with options pointing at it.
fn setup(config: &Value) -> (TempDir, Options) {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), config);
    let opts = Options::new(path, dir.path());
    (dir, opts)
}

fn supercritical() -> Value {
    let mut c = golden("v02");
    c["rates"]["gamma"]["params"]["phi"] = json!(3f64.ln());
    c
}

fn dcj(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dcj")).args(args).output().unwrap()
}

fn dcj_on(verb: &str, opts: &Options) -> std::process::Output {
    dcj(&[
        verb,
        "--config",
        opts.config.to_str().unwrap(),
        "--out",
        opts.out.to_str().unwrap(),
    ])
}

/// Data rows of a CSV, skipping comments and the header.
fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn symmetric_exclusion_model_validates() {
    let (dir, opts) = setup(&golden("v05"));
    let out = cmd_validate(&opts).unwrap();
    assert!(out.pass, "{:?}", out.summary);
    assert_eq!(out.exit_code(), 0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("validate.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], json!(true));
    assert_eq!(report["conditions"].as_array().unwrap().len(), 5);
    assert_eq!(report["subcriticality"]["pass"], json!(true));
}

#[test]
fn asymmetric_leap_array_fails_validation_by_name() {
    let mut c = golden("v05");
    c["rates"]["tau"]["params"]["matrix"][0][1] = json!(0.95);
    let (_dir, opts) = setup(&c);
    let out = cmd_validate(&opts).unwrap();
    assert!(!out.pass);
    assert!(out.summary.iter().any(|l| l.starts_with("FAIL dc-leap symmetry (tau)")), "{:?}", out.summary);
    let failing: Vec<&Value> = out.report["conditions"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == json!(false))
        .collect();
    assert_eq!(failing.len(), 1);
    assert!(failing[0]["violation_count"].as_u64().unwrap() > 0);

    let bin = dcj_on("validate", &opts);
    assert_eq!(bin.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bin.stdout).contains("dc-leap symmetry"));
}

#[test]
fn supercritical_gauge_fails_validation_naming_the_series() {
    let (_dir, opts) = setup(&supercritical());
    let out = cmd_validate(&opts).unwrap();
    assert!(!out.pass);
    let line = out.summary.iter().find(|l| l.starts_with("divergent series")).unwrap();
    assert!(line.contains("term ratio 1.5"), "{line}");
    assert_eq!(dcj_on("validate", &opts).status.code(), Some(1));
}

#[test]
fn closed_model_probabilities_sum_to_one() {
    let (dir, opts) = setup(&golden("v11"));
    let out = cmd_stationary(&opts).unwrap();
    assert!(out.pass);
    let csv = dir.path().join("stationary.csv");
    let total: f64 = rows(&csv).iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() <= 1e-12, "{total}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.contains("# space=full"));
    assert!(!text.contains("omitted_mass"));
}

#[test]
fn open_model_reports_the_omitted_mass() {
    let (dir, opts) = setup(&golden("v02"));
    cmd_stationary(&opts).unwrap();
    let text = std::fs::read_to_string(dir.path().join("stationary.csv")).unwrap();
    assert!(text.contains("# space=truncated"));
    let total: f64 = rows(&dir.path().join("stationary.csv"))
        .iter()
        .map(|r| r[2].parse::<f64>().unwrap())
        .sum();
    let omitted: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# omitted_mass="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(omitted > 0.0 && total < 1.0);
    assert!((total + omitted - 1.0).abs() < 1e-12);
}

#[test]
fn divergent_model_writes_no_stationary_file() {
    let (dir, opts) = setup(&supercritical());
    let err = cmd_stationary(&opts).unwrap_err();
    assert_eq!(err.kind, ErrorKind::Failed);
    assert!(err.to_string().contains("divergent series"), "{err}");
    assert!(!dir.path().join("stationary.csv").exists());

    let bin = dcj_on("stationary", &opts);
    assert_eq!(bin.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bin.stderr).contains("divergent series"));
}

#[test]
fn perturbed_jump_array_fails_verification_with_the_worst_pair() {
    let mut c = golden("v02");
    c["rates"]["beta"]["params"]["matrix"][0][1] = json!(0.77);
    let (_dir, opts) = setup(&c);
    let out = cmd_verify(&opts).unwrap();
    assert!(!out.pass);
    let residual = out.report["balance"]["max_residual"].as_f64().unwrap();
    assert!((residual - 0.1 / 1.1).abs() < 1e-9, "{residual}");
    assert!(out.summary.iter().any(|l| l.starts_with("worst offender:")), "{:?}", out.summary);
    assert_eq!(out.report["balance"]["worst"]["kind"], json!("task-jump-unloaded"));
    assert_eq!(dcj_on("verify", &opts).status.code(), Some(1));
}

#[test]
fn oracle_is_skipped_above_its_state_limit() {
    let mut c = golden("v02");
    c["limits"] = json!({ "oracle_states": 5 });
    let (_dir, opts) = setup(&c);
    let out = cmd_verify(&opts).unwrap();
    assert!(out.pass);
    assert_eq!(out.report["oracle"]["skipped"], json!(true));
    assert!(out.summary.iter().any(|l| l.starts_with("oracle skipped")));
}

#[test]
fn verification_of_a_golden_model_matches_the_oracle() {
    let (_dir, opts) = setup(&golden("v05"));
    let out = cmd_verify(&opts).unwrap();
    assert!(out.pass, "{:?}", out.summary);
    assert!(out.report["oracle"]["max_abs_difference"].as_f64().unwrap() <= 1e-10);
    assert!(out.report["balance"]["max_residual"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn simulation_is_reproducible_from_the_seed() {
    let config = golden("v11");
    let run = |seed: u64| {
        let (dir, mut opts) = setup(&config);
        opts.events = Some(5_000);
        opts.replicas = Some(3);
        opts.seed = Some(seed);
        cmd_simulate(&opts).unwrap();
        let read = |name: &str| {
            // Drop the temporary config path so runs in different directories compare equal.
            std::fs::read_to_string(dir.path().join(name))
                .unwrap()
                .lines()
                .filter(|l| !l.starts_with("# config="))
                .collect::<Vec<_>>()
                .join("\n")
        };
        (read("occupation.csv"), read("convergence.csv"), read("occupation_replica2.csv"))
    };
    assert_eq!(run(7), run(7));
    assert_ne!(run(7).0, run(8).0);
}

#[test]
fn simulation_files_and_convergence_table() {
    let (dir, mut opts) = setup(&golden("v11"));
    opts.events = Some(20_000);
    opts.replicas = Some(2);
    let out = cmd_simulate(&opts).unwrap();
    assert!(out.pass);
    for name in ["occupation_replica0.csv", "occupation_replica1.csv", "occupation.csv", "convergence.csv", "simulate.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let table = rows(&dir.path().join("convergence.csv"));
    let budgets: Vec<&str> = table.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(budgets, ["10", "100", "1000", "10000", "20000"]);
    let merged_tv = out.report["merged_tv"].as_f64().unwrap();
    assert!(merged_tv < 0.1, "{merged_tv}");
    let fractions: f64 = rows(&dir.path().join("occupation.csv"))
        .iter()
        .map(|r| r[1].parse::<f64>().unwrap())
        .sum();
    assert!((fractions - 1.0).abs() < 1e-9);
}

#[test]
fn time_budget_stops_at_the_horizon() {
    let (_dir, mut opts) = setup(&golden("v11"));
    opts.time = Some(50.0);
    let out = cmd_simulate(&opts).unwrap();
    let t = out.report["replicas"][0]["total_time"].as_f64().unwrap();
    assert!((t - 50.0).abs() < 1e-9, "{t}");
}

#[test]
fn zero_budget_is_a_successful_empty_run() {
    let (_dir, mut opts) = setup(&golden("v11"));
    opts.events = Some(0);
    let out = cmd_simulate(&opts).unwrap();
    assert_eq!(out.exit_code(), 0);
    assert_eq!(out.report["merged_tv"], Value::Null);
    assert_eq!(out.report["replicas"][0]["events"], json!(0));

    let bin = dcj(&[
        "simulate",
        "--config",
        opts.config.to_str().unwrap(),
        "--out",
        opts.out.to_str().unwrap(),
        "--events",
        "0",
    ]);
    assert_eq!(bin.status.code(), Some(0));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let missing = dir.path().join("absent.json");
    let bin = dcj(&["validate", "--config", missing.to_str().unwrap(), "--out", out]);
    assert_eq!(bin.status.code(), Some(2));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ \"variant\": \"V1\",\n  \"sites\": 2,\n  oops }").unwrap();
    let bin = dcj(&["verify", "--config", broken.to_str().unwrap(), "--out", out]);
    assert_eq!(bin.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bin.stderr).contains("line 3"));

    let mut c = golden("v02");
    c["rates"]["mu"]["params"]["rate"] = json!(0.0);
    let path = write_config(dir.path(), &c);
    let err = cmd_validate(&Options::new(&path, dir.path())).unwrap_err();
    assert_eq!(err.kind, ErrorKind::Input);
    assert_eq!(err.exit_code(), 2);

    let bin = dcj(&["simulate", "--config", path.to_str().unwrap(), "--events", "5", "--time", "1"]);
    assert_eq!(bin.status.code(), Some(2));
}

#[test]
fn golden_models_pass_every_verb_through_the_binary() {
    let (_dir, opts) = setup(&golden("v02"));
    for verb in ["validate", "stationary", "verify", "report"] {
        let bin = dcj_on(verb, &opts);
        assert_eq!(bin.status.code(), Some(0), "{verb}: {}", String::from_utf8_lossy(&bin.stderr));
        assert!(String::from_utf8_lossy(&bin.stdout).contains("wrote "));
    }
}

#[test]
fn every_output_carries_its_provenance() {
    let (dir, mut opts) = setup(&golden("v11"));
    opts.seed = Some(99);
    let sha = sha256_hex(&std::fs::read(&opts.config).unwrap());
    let report = cmd_report(&opts).unwrap();
    assert!(report.pass);
    let mut sim = opts.clone();
    sim.events = Some(100);
    cmd_simulate(&sim).unwrap();
    let mut checked = 0;
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => {
                assert!(text.contains(&format!("# config_sha256={sha}")), "{}", path.display());
                assert!(text.contains("# seed=99"));
                assert!(text.contains(&format!("# tool=dcj {}", env!("CARGO_PKG_VERSION"))));
            }
            Some("json") if path != opts.config => {
                let v: Value = serde_json::from_str(&text).unwrap();
                assert_eq!(v["provenance"]["config_sha256"], json!(sha), "{}", path.display());
                assert_eq!(v["provenance"]["seed"], json!(99));
                assert_eq!(v["provenance"]["version"], json!(env!("CARGO_PKG_VERSION")));
            }
            _ => continue,
        }
        checked += 1;
    }
    assert_eq!(checked, 8);
}

#[test]
fn report_records_failed_sections_and_fails() {
    let (dir, opts) = setup(&supercritical());
    let out = cmd_report(&opts).unwrap();
    assert!(!out.pass);
    assert!(out.report["sections"]["stationary"]["error"].as_str().unwrap().contains("divergent"));
    assert!(dir.path().join("report.json").exists());
    assert_eq!(dcj_on("report", &opts).status.code(), Some(1));
}

#[test]
fn command_line_overrides_reach_the_model() {
    let (_dir, mut opts) = setup(&golden("v02"));
    opts.nmax = Some(2);
    opts.tol = Some(1e-6);
    let out = cmd_stationary(&opts).unwrap();
    // Three sites, a walker at one of them, tasks capped at 2 per site.
    assert_eq!(out.report["states"], json!(3 * 27));
    assert_eq!(out.report["tolerances"]["balance"], json!(1e-6));
    assert_eq!(out.report["tolerances"]["validation"], json!(1e-6));
}
