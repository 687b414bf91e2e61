//! End-to-end tests against the compiled binary: exit codes, golden outputs
//! and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn taut() -> Command {
    Command::new(env!("CARGO_BIN_EXE_taut"))
}

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(args: &[&str]) -> Output {
    taut().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

#[test]
fn solve_then_verify_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("solution.json");
    let scenario = scenarios_dir().join("five_task.json");
    let out = run(&["solve", &path_str(&scenario), "--out", &path_str(&sol)]);
    assert!(out.status.success(), "{out:?}");
    let out = run(&["verify", &path_str(&scenario), &path_str(&sol)]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6);
    assert!(!text.contains("FAIL"));
}

#[test]
fn schedule_csv_matches_golden_staircase() {
    let scenario = scenarios_dir().join("five_task.json");
    let out = run(&["solve", &path_str(&scenario), "--csv"]);
    assert!(out.status.success());
    // Frozen after a verified run: both curves hug the demand floor at the
    // active deadlines, sensing rests during [55, 85] while transmission
    // keeps running, and the curves coincide from the busy end onward.
    let golden = "\
t_start_s,t_end_s,sense_rate_bps,tx_rate_bps
0,20,50,50
20,55,31.2470127,16.8253145
55,85,0,16.8253145
85,90,21.2709111,21.2709111
90,200,2.72727273,2.72727273
";
    assert_eq!(stdout(&out), golden);
}

#[test]
fn solve_output_is_deterministic() {
    let scenario = scenarios_dir().join("five_task_buffered.json");
    let a = run(&["solve", &path_str(&scenario)]);
    let b = run(&["solve", &path_str(&scenario)]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bench_output_is_deterministic_and_shaped() {
    let config = scenarios_dir().join("bench").join("horizon.json");
    let a = run(&["bench", &path_str(&config)]);
    let b = run(&["bench", &path_str(&config)]);
    assert!(a.status.success(), "{a:?}");
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "axis,scheme,mean_energy_j,std_energy_j,n"
    );
    // 3 axis values x 4 schemes.
    assert_eq!(text.lines().count(), 1 + 3 * 4);
    let reseeded = run(&["bench", &path_str(&config), "--seed", "8"]);
    assert_ne!(a.stdout, reseeded.stdout);
}

#[test]
fn empty_tasks_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(
        &path,
        r#"{"schema":1,"tasks":[],"busy":null,"params":{"alpha":1e-28,
           "cycles_per_bit":500,"noise_dbm":-79.5,"mean_gain":1e-3,
           "bandwidth_hz":1e7}}"#,
    )
    .unwrap();
    let out = run(&["solve", &path_str(&path)]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{not json").unwrap();
    let out = run(&["solve", &path_str(&path)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn undersized_buffer_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tight.json");
    std::fs::write(
        &path,
        r#"{"schema":1,
            "tasks":[{"deadline_s":1.0,"data_bits":2.0},
                     {"deadline_s":2.0,"data_bits":3.0}],
            "busy":null,"buffer_bits":2.0,
            "params":{"alpha":1e-28,"cycles_per_bit":500,"noise_dbm":-79.5,
                      "mean_gain":1e-3,"bandwidth_hz":1e7}}"#,
    )
    .unwrap();
    let out = run(&["solve", &path_str(&path)]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn buffered_flag_requires_a_buffer() {
    let scenario = scenarios_dir().join("five_task.json");
    let out = run(&["solve", &path_str(&scenario), "--buffered"]);
    assert_eq!(out.status.code(), Some(4));
}

fn no_busy_scenario(dir: &Path) -> PathBuf {
    let path = dir.join("no_busy.json");
    std::fs::write(
        &path,
        r#"{"schema":1,
            "tasks":[{"deadline_s":10.0,"data_bits":500.0},
                     {"deadline_s":90.0,"data_bits":700.0},
                     {"deadline_s":200.0,"data_bits":300.0}],
            "busy":null,
            "params":{"alpha":1e-28,"cycles_per_bit":500,"noise_dbm":-79.5,
                      "mean_gain":1e-3,"bandwidth_hz":1e7}}"#,
    )
    .unwrap();
    path
}

#[test]
fn no_busy_schedule_columns_match() {
    let dir = tempfile::tempdir().unwrap();
    let path = no_busy_scenario(dir.path());
    let out = run(&["solve", &path_str(&path), "--csv"]);
    assert!(out.status.success());
    for line in stdout(&out).lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[2], fields[3], "{line}");
    }
}

#[test]
fn sweep_needs_a_height_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let path = no_busy_scenario(dir.path());
    let out = run(&["sweep", &path_str(&path)]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn sweep_emits_bounds_and_criticals() {
    let scenario = scenarios_dir().join("five_task_buffered.json");
    let out = run(&["sweep", &path_str(&scenario), "--points", "50"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# h_l=2050 h_u=2100 lower_clipped=false\n"));
    assert!(text.contains("# criticals=2083.33333"));
    assert!(text.contains("h_bits,e_total_j,e_sense_j,e_tx_j"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 51);
}

#[test]
fn tampered_height_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let sol_path = dir.path().join("solution.json");
    let scenario = scenarios_dir().join("five_task.json");
    assert!(run(&["solve", &path_str(&scenario), "--out", &path_str(&sol_path)])
        .status
        .success());
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sol_path).unwrap()).unwrap();
    let h = doc["height_bits"].as_f64().unwrap();
    doc["height_bits"] = serde_json::json!(h * 1.1);
    std::fs::write(&sol_path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let out = run(&["verify", &path_str(&scenario), &path_str(&sol_path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL height within bounds"));
}

#[test]
fn busy_sensing_edit_fails_feasibility() {
    let dir = tempfile::tempdir().unwrap();
    let sol_path = dir.path().join("solution.json");
    let scenario = scenarios_dir().join("five_task.json");
    assert!(run(&["solve", &path_str(&scenario), "--out", &path_str(&sol_path)])
        .status
        .success());
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sol_path).unwrap()).unwrap();
    // The third sensing segment spans the busy interval; give it a rate.
    let seg = &mut doc["sensing"][2];
    assert_eq!(seg["t_start_s"].as_f64().unwrap(), 55.0);
    seg["rate_bps"] = serde_json::json!(0.1);
    std::fs::write(&sol_path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let out = run(&["verify", &path_str(&scenario), &path_str(&sol_path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL feasibility"));
}
