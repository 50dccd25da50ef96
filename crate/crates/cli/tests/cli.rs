use std::path::Path;
use std::process::{Command, Output};

fn gwsim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwsim")).args(args).current_dir(cwd).env_remove("GWSIM_OUT").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const BARBELL: &str = r#"{
  "name": "tiny_barbell",
  "waveform": { "amplitude": 1e-4, "angular_frequency": 2.0, "phase": -1.5707963267948966, "duration": 6.283185307179586 },
  "backend": {
    "kind": "barbell",
    "config": { "particle_mass": 1.0, "nominal_radius": 1.0, "rotation_rate": 1.0, "radial_stiffness": 0.0 },
    "dt": 0.015707963267948967,
    "stride": 1
  }
}"#;

#[test]
fn lists_builtin_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let o = gwsim(&["list-scenarios"], dir.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["paper_barbell", "paper_bec_bound", "hydrogen_elements", "estimates"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
    assert!(!text.contains("invalid"));
}

#[test]
fn validates_builtins_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = gwsim(&["validate", "barbell_scaling"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().contains("7 point(s)"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, BARBELL.replace("\"stride\": 1", "\"stride\": 1, \"colour\": 3")).unwrap();
    assert_eq!(code(&gwsim(&["validate", bad.to_str().unwrap()], dir.path())), 2);
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&gwsim(&["run", bad.to_str().unwrap()], dir.path())), 2);
    assert_eq!(code(&gwsim(&["run", "no_such_scenario"], dir.path())), 2);
}

#[test]
fn coarse_step_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("coarse.json");
    std::fs::write(&cfg, BARBELL.replace("0.015707963267948967", "0.3141592653589793")).unwrap();
    let o = gwsim(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("b.json");
    std::fs::write(&cfg, BARBELL).unwrap();
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let o = gwsim(&["run", cfg.to_str().unwrap(), "--out", blocker.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn run_writes_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("b.json");
    std::fs::write(&cfg, BARBELL).unwrap();
    let mut ledgers = Vec::new();
    for out in ["a", "b"] {
        let o = gwsim(&["run", cfg.to_str().unwrap(), "--out", out], dir.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let base = dir.path().join(out).join("tiny_barbell");
        let ledger = std::fs::read_to_string(base.join("ledger_000.csv")).unwrap();
        assert!(ledger.starts_with("t,dE_dt,E_cum,bound_rhs,bound_rot\n"));
        assert_eq!(ledger.lines().count(), 402);
        let result: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(base.join("result.json")).unwrap()).unwrap();
        assert_eq!(result["backend"], "barbell");
        assert!(result["points"][0]["max_bound_ratio"].as_f64().unwrap() <= 1.0 + 1e-12);
        ledgers.push((ledger, std::fs::read(base.join("trajectory_000.csv")).unwrap()));
    }
    assert_eq!(ledgers[0], ledgers[1]);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gwsim"))
        .args(["run", "estimates"])
        .current_dir(dir.path())
        .env("GWSIM_OUT", "from_env")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("from_env/estimates/result.json").exists());
}
