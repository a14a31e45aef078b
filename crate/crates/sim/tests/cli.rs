use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use irs_sim::experiments::routes;
use irs_sim::scenes;

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irs-sim")).args(args).output().unwrap()
}

fn scenario_file(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "scenarios", name].iter().collect()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn validate_accepts_shipped_scenes() {
    for name in ["fig4.json", "fig7.json", "fig9.json"] {
        let out = sim(&["validate", "--config", scenario_file(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn malformed_json_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.json", "{ \"irs\": [ ");
    assert_eq!(sim(&["validate", "--config", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn invalid_scene_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(scenes::FIG4).unwrap();
    cfg["irs"][0]["pointing_normal"] = serde_json::json!([1.0, 1.0, 0.0]);
    let p = write(dir.path(), "scene.json", &cfg.to_string());
    let out = sim(&["validate", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unit"));
}

#[test]
fn missing_file_exits_2() {
    assert_eq!(sim(&["validate", "--config", "/nonexistent/scene.json"]).status.code(), Some(2));
}

#[test]
fn unknown_scenario_prints_usage_and_exits_2() {
    let out = sim(&["run", "--scenario", "fig99"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("usage"));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(sim(&["run", "--scenario", "fig8", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(sim(&["run", "--scenario", "fig8", "--trials", "x"]).status.code(), Some(2));
    assert_eq!(sim(&["run", "--scenario", "custom"]).status.code(), Some(2));
    assert_eq!(sim(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn isolated_user_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(scenes::FIG4).unwrap();
    cfg["obstacles"] = serde_json::json!([{ "min": [49.0, -1.5, -3.0], "max": [49.5, 1.5, 3.0] }]);
    let p = write(dir.path(), "scene.json", &cfg.to_string());
    let out = sim(&["run", "--scenario", "custom", "--config", p.to_str().unwrap(), "--trials", "1"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn routes_matches_experiment_dump() {
    let out = sim(&["routes"]);
    assert_eq!(out.status.code(), Some(0));
    let printed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let base = scenes::parse(scenes::FIG9).unwrap();
    let (dump, ..) = routes::route_dump(&base, &routes::DEFAULT_M0).unwrap();
    assert_eq!(printed, serde_json::to_value(&dump).unwrap());
    assert!(printed["unconstrained"]["shares_link"].as_bool().unwrap());
    assert!(printed["constrained"]["separated"].as_bool().unwrap());
    assert_ne!(printed["unconstrained"]["routes"][1], printed["constrained"]["routes"][1]);
}

#[test]
fn csv_has_schema_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let st = sim(&["run", "--scenario", "fig8", "--seed", "3", "--trials", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(st.status.code(), Some(0));
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "scenario,sweep_name,sweep_value,metric,mean,stderr,trials,seed");
    assert!(text.lines().skip(1).all(|l| l.starts_with("fig8,") && l.ends_with(",3")));
}

#[test]
fn sweep_override_is_used() {
    let out = sim(&["run", "--scenario", "fig8", "--sweep", "40,400", "--trials", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("fig8,bs_antennas,40.0,overhead_proposed_single,4800.0"));
    assert!(text.contains("fig8,bs_antennas,400.0,overhead_proposed_single,1200.0"));
    assert!(!text.contains("bs_antennas,80.0"));
}

#[test]
fn full_scale_multiplies_default_trials() {
    let run = |extra: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_irs-sim"))
            .args(["run", "--scenario", "fig8", "--sweep", "10"])
            .args(extra)
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let trials = |csv: &str| {
        let row = csv.lines().find(|l| l.contains(",ls_nmse,")).unwrap();
        row.split(',').nth(6).unwrap().to_string()
    };
    assert_eq!(trials(&run(&[])), "20");
    assert_eq!(trials(&run(&["--full-scale"])), "200");
    assert_eq!(trials(&run(&["--full-scale", "--trials", "3"])), "3");
}
