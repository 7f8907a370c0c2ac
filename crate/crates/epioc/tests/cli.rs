//! End-to-end tests of the `epioc` binary: exit-code contract, output
//! files, determinism, and the shipped presets.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_epioc"))
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../presets")
        .join(format!("{name}.json"))
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn simulate_writes_trajectory_and_metrics() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["simulate", preset("influenza").to_str().unwrap()])
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let trajectory = read(out.path(), "trajectory.csv");
    assert!(trajectory.starts_with("t,S,I,R\n"));
    assert_eq!(trajectory.lines().count(), 152); // header + 151 nodes
    let metrics = read(out.path(), "metrics.csv");
    assert!(metrics.contains("peak_infected,"));
}

#[test]
fn simulate_cape_verde_has_eight_state_columns() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "simulate",
            preset("capeverde-seirasei").to_str().unwrap(),
            "--method",
            "rk45",
        ])
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let trajectory = read(out.path(), "trajectory.csv");
    let header = trajectory.lines().next().unwrap();
    // t + 8 states + 1 control
    assert_eq!(header, "t,s_h,e_h,i_h,r_h,a_m,s_m,e_m,i_m,c");
}

#[test]
fn two_node_grid_yields_two_row_trajectory() {
    let mut s = epioc::presets::influenza();
    s.grid.n_steps = 1;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.json");
    std::fs::write(&path, epioc::scenario::serialize(&s)).unwrap();
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["simulate", path.to_str().unwrap()])
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let trajectory = read(out.path(), "trajectory.csv");
    assert_eq!(trajectory.lines().count(), 3); // header + 2 nodes
}

#[test]
fn missing_scenario_file_exits_2() {
    let status = bin()
        .args(["simulate", "/nonexistent/scenario.json"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn invalid_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = std::fs::read_to_string(preset("influenza")).unwrap();
    std::fs::write(&path, text.replace("\"beta\": 1.66", "\"beta\": -1.66")).unwrap();
    let status = bin()
        .args(["analyze", path.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn csv_outputs_are_byte_identical_across_runs() {
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let out = tempfile::tempdir().unwrap();
        let status = bin()
            .args(["analyze", preset("capeverde-sirasi").to_str().unwrap()])
            .arg("--out")
            .arg(out.path())
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(read(out.path(), "analysis.csv"));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn every_preset_passes_analyze() {
    for (name, _) in epioc::presets::list() {
        let out = tempfile::tempdir().unwrap();
        let status = bin()
            .args(["analyze", preset(name).to_str().unwrap()])
            .arg("--out")
            .arg(out.path())
            .status()
            .unwrap();
        assert!(status.success(), "{name} failed analyze");
        let analysis = read(out.path(), "analysis.csv");
        assert!(analysis.starts_with("quantity,value\n"), "{name}");
    }
}

#[test]
fn analyze_reports_thresholds_for_cape_verde() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "analyze",
            preset("capeverde-seirasei").to_str().unwrap(),
            "--critical",
            "c",
        ])
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let analysis = read(out.path(), "analysis.csv");
    let value_of = |key: &str| -> f64 {
        analysis
            .lines()
            .find(|l| l.starts_with(key))
            .unwrap_or_else(|| panic!("{key} row missing"))
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((value_of("R0_closed_form") - 2.396).abs() < 0.005);
    assert!((value_of("R0_next_generation") - 2.396).abs() < 0.005);
    assert!((value_of("critical_c") - 0.156961).abs() < 1e-4);
    assert!(analysis.contains("equilibrium2.kind,BRDFE"));
}

#[test]
fn optimize_writes_solution_files() {
    // zero infection weight makes u = 0 a fixed point: converges at once
    let mut s = epioc::presets::cape_verde_seir_asei();
    s.weights.insert("gamma_D".into(), 0.0);
    s.weights.insert("gamma_S".into(), 1.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("case_c.json");
    std::fs::write(&path, epioc::scenario::serialize(&s)).unwrap();

    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["optimize", path.to_str().unwrap(), "--solver", "sweep"])
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    for name in [
        "control.csv",
        "trajectory.csv",
        "costate.csv",
        "objective.txt",
        "convergence.csv",
    ] {
        let content = read(out.path(), name);
        assert!(!content.is_empty(), "{name} must not be empty");
    }
    let objective: f64 = read(out.path(), "objective.txt").trim().parse().unwrap();
    assert_eq!(objective, 0.0);
    // control stays identically zero
    let control = read(out.path(), "control.csv");
    for line in control.lines().skip(1) {
        let u: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(u, 0.0);
    }
}

#[test]
fn optimize_nonconvergence_exits_4_with_outputs() {
    let mut s = epioc::presets::cape_verde_seir_asei();
    s.solver.max_iter = 2; // cannot converge in two sweeps
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.json");
    std::fs::write(&path, epioc::scenario::serialize(&s)).unwrap();

    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["optimize", path.to_str().unwrap()])
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
    assert!(out.path().join("objective.txt").exists());
    assert!(out.path().join("convergence.csv").exists());
}

#[test]
fn strategy_reproduces_budget_column_and_ranking() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["strategy", preset("capeverde-seirasei").to_str().unwrap()])
        .arg("--out")
        .arg(out.path())
        .args(["--schedule", "pulse:6,1,1"])
        .args(["--schedule", "pulse:7,1,1"])
        .args(["--schedule", "pulse:10,1,1"])
        .args(["--schedule", "pulse:15,1,1"])
        .args(["--schedule", "pulse:30,1,1"])
        .args(["--schedule", "constant:0.157"])
        .status()
        .unwrap();
    assert!(status.success());
    let metrics = read(out.path(), "strategy_metrics.csv");
    let amounts: Vec<f64> = metrics
        .lines()
        .skip(1)
        .map(|l| l.split(',').next_back().unwrap().parse().unwrap())
        .collect();
    assert_eq!(&amounts[..5], &[14.0, 12.0, 9.0, 6.0, 3.0]);
    assert!((amounts[5] - 13.188).abs() < 1e-12);

    let ranking = read(out.path(), "ranking.csv");
    assert!(ranking.starts_with("rank,index,label,"));
    // the 6-day pulse outranks the 30-day pulse
    let rank_of = |index: usize| {
        ranking
            .lines()
            .skip(1)
            .position(|l| l.split(',').nth(1).unwrap() == index.to_string())
            .unwrap()
    };
    assert!(rank_of(0) < rank_of(4));
}

#[test]
fn strategy_constant_zero_matches_simulate_metrics() {
    let scenario = preset("capeverde-seirasei");
    let out_sim = tempfile::tempdir().unwrap();
    assert!(bin()
        .args(["simulate", scenario.to_str().unwrap()])
        .arg("--out")
        .arg(out_sim.path())
        .status()
        .unwrap()
        .success());
    let out_strat = tempfile::tempdir().unwrap();
    assert!(bin()
        .args(["strategy", scenario.to_str().unwrap()])
        .arg("--out")
        .arg(out_strat.path())
        .args(["--schedule", "constant:0"])
        .status()
        .unwrap()
        .success());

    let metrics = read(out_sim.path(), "metrics.csv");
    let peak_sim: f64 = metrics
        .lines()
        .find(|l| l.starts_with("peak_infected,"))
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    let strategy = read(out_strat.path(), "strategy_metrics.csv");
    let peak_strat: f64 = strategy
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(peak_sim, peak_strat);
}
