use std::path::Path;
use std::process::{Command, Output};

use bbjump_cli::{ExperimentConfig, ExperimentReport, Scenario};

const MEMORY: &str = r#"
scenario = "memory_fidelity"
base_seed = 11
n = 2
num_trajectories = 300
duration = 0.2
t_c = 0.02

[noise]
gamma = 1.0
p_undetected = 0.05
"#;

fn bbjump(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bbjump"));
    cmd.args(args).env("RUST_LOG", "warn");
    match env_out {
        Some(dir) => cmd.env("BBJUMP_OUT_DIR", dir),
        None => cmd.env_remove("BBJUMP_OUT_DIR"),
    };
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn load_report(path: &Path) -> ExperimentReport {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn list_names_every_scenario() {
    let out = bbjump(&["list"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for s in Scenario::ALL {
        assert!(text.contains(s.name()));
    }
}

#[test]
fn verify_passes() {
    let out = bbjump(&["verify", "--seed", "3"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 10);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", &format!("{MEMORY}\nwarp = 9\n"));
    let out = bbjump(&["run", "--config", &bad], None);
    assert_eq!(out.status.code(), Some(2));

    let odd = format!("{MEMORY}\n[[program]]\ntime = 0.015\ngate = \"exp_z\"\nqubits = [2]\nangle = 0.4\n");
    let odd = write_config(dir.path(), "odd.toml", &odd);
    let out = bbjump(&["run", "--config", &odd], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("program[0]"));

    let missing = dir.path().join("absent.toml");
    let out = bbjump(&["run", "--config", missing.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "m.toml", MEMORY);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = bbjump(&["run", "--config", &cfg, "--out", d.to_str().unwrap()], None);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let mut ra = load_report(&a.join("memory_fidelity.json"));
    let mut rb = load_report(&b.join("memory_fidelity.json"));
    ra.timestamp = 0;
    rb.timestamp = 0;
    assert_eq!(ra.to_json().unwrap(), rb.to_json().unwrap());
    assert_eq!(ra.rows.len(), 2);
    assert!(ra.counts.unwrap().is_consistent());

    let c = dir.path().join("c");
    let out = bbjump(&["run", "--config", &cfg, "--seed", "12", "--out", c.to_str().unwrap()], None);
    assert!(out.status.success());
    let rc = load_report(&c.join("memory_fidelity.json"));
    assert_eq!(rc.seed, 12);
    assert_ne!(rc.fidelity, ra.fidelity);
}

#[test]
fn csv_has_one_row_per_sweep_point() {
    let dir = tempfile::tempdir().unwrap();
    let text = MEMORY.replace("memory_fidelity", "detector_sweep")
        + "\n[sweep]\ndetector = [[0.0, 0.0], [0.1, 0.0], [0.0, 0.2]]\n";
    let cfg = write_config(dir.path(), "d.toml", &text);
    let out = bbjump(&["run", "--config", &cfg, "--format", "both", "--out", dir.path().to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv_text = std::fs::read_to_string(dir.path().join("detector_sweep.csv")).unwrap();
    let prelude = csv_text.lines().take_while(|l| l.starts_with('#')).count();
    assert!(prelude >= 4);
    let body: Vec<&str> = csv_text.lines().skip(prelude).collect();
    assert!(body[0].starts_with("point,label,p_undetected,p_misidentify,mean_fidelity"));
    assert_eq!(body.len() - 1, 3);
    let report = load_report(&dir.path().join("detector_sweep.json"));
    assert_eq!(report.rows.len(), 3);
}

#[test]
fn echoed_config_revalidates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "m.toml", MEMORY);
    let out = bbjump(&["run", "--config", &cfg], None);
    assert!(out.status.success());
    let report: ExperimentReport = serde_json::from_slice(&out.stdout).unwrap();
    let toml_text = toml::to_string(&report.config).unwrap();
    let back = ExperimentConfig::from_toml_str(&toml_text).unwrap();
    assert_eq!(back, report.config);
}

#[test]
fn output_dir_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "m.toml", MEMORY);
    let env_dir = dir.path().join("env");
    let flag_dir = dir.path().join("flag");
    let out = bbjump(&["run", "--config", &cfg, "--trajectories", "20"], Some(&env_dir));
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(env_dir.join("memory_fidelity.json").exists());
    let out = bbjump(&["run", "--config", &cfg, "--trajectories", "20", "--out", flag_dir.to_str().unwrap()], Some(&env_dir));
    assert!(out.status.success());
    assert!(flag_dir.join("memory_fidelity.json").exists());
    assert_eq!(load_report(&flag_dir.join("memory_fidelity.json")).config.num_trajectories, 20);
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ExperimentConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= Scenario::ALL.len());
}
