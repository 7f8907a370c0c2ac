//! The `simulate`/`analyze`/`optimize`/`strategy` commands behind the CLI:
//! each one runs a scenario and writes plot-ready CSV files (17 significant
//! digits, one observable per column) into an output directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::analysis::{self, AnalysisError, EquilibriumKind};
use crate::integrators::{self, IntegrateError, Method, Trajectory};
use crate::ocp::direct::{solve_direct, to_mayer, transcribe, DirectConfig, Scheme};
use crate::ocp::indirect::{sweep, SweepConfig};
use crate::ocp::{OcError, OcProblem, OcSolution};
use crate::scenario::{ControlSpec, Scenario, ScenarioError, SolverMethod};
use crate::strategies::{self, ControlSchedule, OutbreakMetrics, StrategyError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Oc(#[from] OcError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    /// Process exit code contract: 2 validation, 3 integration/analysis
    /// failures, 4 solver non-convergence, 1 everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Scenario(_) => 2,
            RunError::Strategy(StrategyError::Scenario(_))
            | RunError::Strategy(StrategyError::ScheduleMismatch { .. })
            | RunError::Strategy(StrategyError::UnknownKnob(_))
            | RunError::Strategy(StrategyError::TooFewStrategies(_)) => 2,
            RunError::Oc(OcError::Scenario(_))
            | RunError::Oc(OcError::Model(_))
            | RunError::Oc(OcError::NotOptimizeMode(_))
            | RunError::Oc(OcError::NonIntegralStep { .. }) => 2,
            RunError::Analysis(AnalysisError::UnknownKnob(_))
            | RunError::Analysis(AnalysisError::Bracket { .. }) => 2,
            RunError::Oc(_) => 4,
            RunError::Integrate(_) | RunError::Strategy(StrategyError::Integrate(_)) => 3,
            RunError::Analysis(_) => 3,
            RunError::Io { .. } => 1,
        }
    }
}

/// Where a command ran and what it produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub command: String,
    pub scenario_digest: String,
    pub outputs: Vec<PathBuf>,
    pub summary: BTreeMap<String, f64>,
    pub converged: bool,
    pub runtime_seconds: f64,
}

impl RunReport {
    pub fn print(&self) {
        println!("command: {}", self.command);
        println!("scenario: {}", self.scenario_digest);
        for path in &self.outputs {
            println!("wrote: {}", path.display());
        }
        for (key, value) in &self.summary {
            println!("{key} = {value}");
        }
        println!("runtime_seconds = {:.3}", self.runtime_seconds);
    }
}

/// 17 significant digits, plot-ready.
fn fmt_value(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, RunError> {
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn trajectory_csv(scenario: &Scenario, traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for name in scenario.state_names() {
        let _ = write!(out, ",{name}");
    }
    for name in scenario.model.control_names() {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    let empty: Vec<Vec<f64>> = Vec::new();
    let controls = traj.controls.as_ref().unwrap_or(&empty);
    for (i, t) in traj.times.iter().enumerate() {
        let _ = write!(out, "{}", fmt_value(*t));
        for v in &traj.states[i] {
            let _ = write!(out, ",{}", fmt_value(*v));
        }
        if let Some(row) = controls.get(i) {
            for v in row {
                let _ = write!(out, ",{}", fmt_value(*v));
            }
        }
        out.push('\n');
    }
    out
}

fn metrics_csv(scenario: &Scenario, metrics: &OutbreakMetrics) -> String {
    let mut out = String::from("metric,value\n");
    let _ = writeln!(out, "peak_infected,{}", fmt_value(metrics.peak_infected));
    let _ = writeln!(out, "peak_time,{}", fmt_value(metrics.peak_time));
    let _ = writeln!(
        out,
        "cumulative_infected,{}",
        fmt_value(metrics.cumulative_infected)
    );
    for (name, amount) in scenario
        .model
        .control_names()
        .iter()
        .zip(&metrics.total_control_amount)
    {
        let _ = writeln!(out, "total_{name},{}", fmt_value(*amount));
    }
    for (name, value) in scenario.state_names().iter().zip(&metrics.final_state) {
        let _ = writeln!(out, "final_{name},{}", fmt_value(*value));
    }
    out
}

fn schedules_from_spec(scenario: &Scenario) -> Vec<ControlSchedule> {
    let model = scenario.model;
    match &scenario.control {
        ControlSpec::Constant { levels } => levels
            .iter()
            .map(|l| ControlSchedule::constant(*l))
            .collect(),
        ControlSpec::Pulse { schedules } => schedules
            .iter()
            .map(|p| ControlSchedule::pulse(p.period, p.duty, p.level))
            .collect(),
        // optimize-mode scenarios simulate under neutral controls
        ControlSpec::Optimize { .. } => model
            .neutral_controls()
            .iter()
            .map(|l| ControlSchedule::constant(*l))
            .collect(),
    }
}

/// Simulates the scenario and writes `trajectory.csv` and `metrics.csv`.
pub fn cmd_simulate(
    scenario: &Scenario,
    out_dir: &Path,
    method: Option<Method>,
) -> Result<RunReport, RunError> {
    let start = Instant::now();
    scenario.validate()?;
    let schedules = schedules_from_spec(scenario);
    let method = method.unwrap_or(match scenario.solver.method {
        SolverMethod::Euler => Method::Euler,
        SolverMethod::Rk2 => Method::Rk2,
        SolverMethod::Rk4 => Method::Rk4,
        _ => Method::Rk45,
    });

    let (traj, metrics) = if method == Method::Rk45 {
        strategies::simulate_schedule(scenario, &schedules)?
    } else {
        // fixed-step methods sample the schedule at the grid nodes
        let def = crate::models::ModelDefinition::for_scenario(scenario);
        let field = def.field(&scenario.params);
        let nodes = scenario.grid.nodes();
        let neutral = scenario.model.neutral_controls();
        let controls: Vec<Vec<f64>> = nodes
            .iter()
            .map(|t| {
                schedules
                    .iter()
                    .zip(&neutral)
                    .map(|(s, off)| match s {
                        ControlSchedule::Constant { level } => *level,
                        pulse => {
                            let _ = off;
                            // reuse the schedule arithmetic through a tiny horizon probe
                            match pulse {
                                ControlSchedule::Pulse {
                                    period,
                                    duty,
                                    level,
                                } => {
                                    let phase = (t - scenario.grid.t0).rem_euclid(*period);
                                    if phase < duty * period {
                                        *level
                                    } else {
                                        *off
                                    }
                                }
                                ControlSchedule::Constant { level } => *level,
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        let traj = integrators::integrate(&field, &nodes, &scenario.initial, &controls, method)?;
        let metrics = strategies::trajectory_metrics(scenario, &traj, &schedules);
        (traj, metrics)
    };

    let outputs = vec![
        write_file(out_dir, "trajectory.csv", &trajectory_csv(scenario, &traj))?,
        write_file(out_dir, "metrics.csv", &metrics_csv(scenario, &metrics))?,
    ];

    let mut summary = BTreeMap::new();
    summary.insert("peak_infected".into(), metrics.peak_infected);
    summary.insert("cumulative_infected".into(), metrics.cumulative_infected);
    Ok(RunReport {
        command: "simulate".into(),
        scenario_digest: scenario.digest(),
        outputs,
        summary,
        converged: true,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Threshold analysis: R0 by both routes, the mosquito offspring quantity,
/// every equilibrium with its stability, and optionally a critical knob
/// level. Writes `analysis.csv`.
pub fn cmd_analyze(
    scenario: &Scenario,
    out_dir: &Path,
    critical_knob: Option<&str>,
) -> Result<RunReport, RunError> {
    let start = Instant::now();
    scenario.validate()?;
    let model = scenario.model;
    let controls = scenario.control.constant_levels(model);
    let mut rows: Vec<(String, String)> = Vec::new();
    let mut summary = BTreeMap::new();

    match analysis::closed_form_r0(model, &scenario.params, &controls) {
        Ok(r) => {
            rows.push(("R0_closed_form".into(), fmt_value(r.value)));
            summary.insert("r0_closed_form".into(), r.value);
        }
        Err(AnalysisError::NotDefined { .. }) | Err(AnalysisError::MosquitoCollapse { .. }) => {}
        Err(e) => return Err(e.into()),
    }
    match analysis::offspring_quantity(model, &scenario.params, &controls) {
        Ok(m) => rows.push(("M".into(), fmt_value(m))),
        Err(AnalysisError::NotDefined { .. }) => {}
        Err(e) => return Err(e.into()),
    }

    match analysis::find_equilibria(model, &scenario.params, &controls) {
        Ok(points) => {
            // next-generation R0 at the most realistic disease-free point
            let dfe = points
                .iter()
                .find(|p| p.kind == EquilibriumKind::Brdfe)
                .or_else(|| points.iter().find(|p| p.kind == EquilibriumKind::TrivialDfe));
            if let Some(dfe) = dfe {
                match analysis::next_generation_r0(model, &scenario.params, &controls, dfe) {
                    Ok(r) => {
                        rows.push(("R0_next_generation".into(), fmt_value(r.value)));
                        summary.insert("r0_next_generation".into(), r.value);
                    }
                    Err(AnalysisError::NotDefined { .. }) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            for (i, point) in points.iter().enumerate() {
                let classified =
                    analysis::classify_stability(model, &scenario.params, &controls, point)?;
                let tag = format!("equilibrium{}", i + 1);
                rows.push((format!("{tag}.kind"), classified.kind.label().into()));
                rows.push((format!("{tag}.residual"), fmt_value(classified.residual)));
                if let Some(s) = classified.stability {
                    rows.push((format!("{tag}.stability"), s.label().into()));
                }
                if let Some(l) = classified.leading_eigenvalue_real_part {
                    rows.push((format!("{tag}.leading_eigenvalue_re"), fmt_value(l)));
                }
                for (name, v) in scenario
                    .model
                    .state_names(false)
                    .iter()
                    .zip(&classified.state)
                {
                    rows.push((format!("{tag}.{name}"), fmt_value(*v)));
                }
            }
        }
        Err(AnalysisError::NotDefined { .. }) => {}
        Err(e) => return Err(e.into()),
    }

    if let Some(knob) = critical_knob {
        let value =
            analysis::critical_control(model, &scenario.params, &controls, knob, (0.0, 1.0))?;
        rows.push((format!("critical_{knob}"), fmt_value(value)));
        summary.insert(format!("critical_{knob}"), value);
    }

    let mut csv = String::from("quantity,value\n");
    for (k, v) in &rows {
        let _ = writeln!(csv, "{k},{v}");
    }
    let outputs = vec![write_file(out_dir, "analysis.csv", &csv)?];
    Ok(RunReport {
        command: "analyze".into(),
        scenario_digest: scenario.digest(),
        outputs,
        summary,
        converged: true,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

fn costate_csv(scenario: &Scenario, traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for name in scenario.state_names() {
        let _ = write!(out, ",lambda_{name}");
    }
    out.push('\n');
    if let Some(costates) = &traj.costates {
        for (t, row) in traj.times.iter().zip(costates) {
            let _ = write!(out, "{}", fmt_value(*t));
            for v in row {
                let _ = write!(out, ",{}", fmt_value(*v));
            }
            out.push('\n');
        }
    }
    out
}

fn control_csv(scenario: &Scenario, traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for name in scenario.model.control_names() {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    if let Some(controls) = &traj.controls {
        for (t, row) in traj.times.iter().zip(controls) {
            let _ = write!(out, "{}", fmt_value(*t));
            for v in row {
                let _ = write!(out, ",{}", fmt_value(*v));
            }
            out.push('\n');
        }
    }
    out
}

fn convergence_csv(solution: &OcSolution) -> String {
    let mut out = String::from("iteration,objective,relative_change\n");
    let mut prev: Option<f64> = None;
    for (i, j) in solution.objective_history.iter().enumerate() {
        let change = match prev {
            Some(p) => (p - j).abs() / p.abs().max(1e-12),
            None => 0.0,
        };
        let _ = writeln!(out, "{i},{},{}", fmt_value(*j), fmt_value(change));
        prev = Some(*j);
    }
    out
}

/// Solves the scenario's optimal-control problem with the sweep or the
/// direct transcription and writes `control.csv`, `trajectory.csv`,
/// `costate.csv` (sweep only), `objective.txt` and `convergence.csv`.
/// Non-convergence still writes every file; the report carries the flag.
pub fn cmd_optimize(
    scenario: &Scenario,
    out_dir: &Path,
    solver: Option<SolverMethod>,
) -> Result<RunReport, RunError> {
    let start = Instant::now();
    scenario.validate()?;
    let method = solver.unwrap_or(scenario.solver.method);
    let oc = OcProblem::from_scenario(scenario)?;

    let solution = match method {
        SolverMethod::Sweep => {
            let config = SweepConfig {
                tol: scenario.solver.tol,
                max_iter: scenario.solver.max_iter,
                relaxation: scenario.solver.relaxation.unwrap_or(0.5),
            };
            sweep(&oc.problem, &oc.grid, &oc.initial, &config)?
        }
        SolverMethod::Direct => {
            let mayer = to_mayer(&oc.problem);
            let nlp = transcribe(&mayer, &oc.grid, &oc.initial, Scheme::Euler, oc.grid.h())?;
            let config = DirectConfig {
                tol: scenario.solver.tol,
                max_iter: scenario.solver.max_iter,
                control_intervals: scenario.solver.control_intervals,
                ..DirectConfig::default()
            };
            solve_direct(&nlp, &config)?
        }
        other => {
            return Err(ScenarioError::invalid(
                "solver.method",
                format!("optimize expects `sweep` or `direct`, got {other:?}"),
            )
            .into())
        }
    };

    // report in the scenario's (possibly normalized) form
    let normalized_view = if scenario.model.is_host_vector() {
        crate::scenario::normalize_scenario(scenario)?
    } else {
        scenario.clone()
    };

    let mut outputs = Vec::new();
    outputs.push(write_file(
        out_dir,
        "control.csv",
        &control_csv(&normalized_view, &solution.trajectory),
    )?);
    outputs.push(write_file(
        out_dir,
        "trajectory.csv",
        &trajectory_csv(&normalized_view, &solution.trajectory),
    )?);
    if solution.trajectory.costates.is_some() {
        outputs.push(write_file(
            out_dir,
            "costate.csv",
            &costate_csv(&normalized_view, &solution.trajectory),
        )?);
    }
    outputs.push(write_file(
        out_dir,
        "objective.txt",
        &format!("{}\n", fmt_value(solution.objective)),
    )?);
    outputs.push(write_file(out_dir, "convergence.csv", &convergence_csv(&solution))?);

    let mut summary = BTreeMap::new();
    summary.insert("objective".into(), solution.objective);
    summary.insert("iterations".into(), solution.iterations as f64);
    summary.insert(
        "converged".into(),
        if solution.converged { 1.0 } else { 0.0 },
    );
    summary.insert(
        "final_relative_change".into(),
        solution.final_relative_change,
    );
    Ok(RunReport {
        command: "optimize".into(),
        scenario_digest: scenario.digest(),
        outputs,
        summary,
        converged: solution.converged,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Parses one schedule argument. Grammar per control, semicolon separated:
/// `[control=]constant:LEVEL` or `[control=]pulse:PERIOD,DUTY_DAYS,LEVEL`;
/// controls not mentioned stay at their neutral level.
pub fn parse_schedule_spec(
    scenario: &Scenario,
    spec: &str,
) -> Result<Vec<ControlSchedule>, ScenarioError> {
    let model = scenario.model;
    let names = model.control_names();
    let neutral = model.neutral_controls();
    let mut schedules: Vec<ControlSchedule> = neutral
        .iter()
        .map(|l| ControlSchedule::constant(*l))
        .collect();

    for (slot, part) in spec.split(';').enumerate() {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (index, body) = match part.split_once('=') {
            Some((name, rest)) => {
                let idx = names.iter().position(|n| *n == name).ok_or_else(|| {
                    ScenarioError::invalid("schedule", format!("unknown control `{name}`"))
                })?;
                (idx, rest)
            }
            None => (slot, part),
        };
        if index >= schedules.len() {
            return Err(ScenarioError::invalid(
                "schedule",
                format!("model {model} has {} controls", schedules.len()),
            ));
        }
        let (kind, args) = body.split_once(':').ok_or_else(|| {
            ScenarioError::invalid("schedule", format!("expected kind:args in `{body}`"))
        })?;
        let numbers: Vec<f64> = args
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| ScenarioError::invalid("schedule", format!("bad number `{a}`")))
            })
            .collect::<Result<_, _>>()?;
        schedules[index] = match kind {
            "constant" => {
                if numbers.len() != 1 {
                    return Err(ScenarioError::invalid("schedule", "constant takes one level"));
                }
                ControlSchedule::constant(numbers[0])
            }
            "pulse" => {
                if numbers.len() != 3 {
                    return Err(ScenarioError::invalid(
                        "schedule",
                        "pulse takes period,duty_days,level",
                    ));
                }
                let (period, duty_days, level) = (numbers[0], numbers[1], numbers[2]);
                if period <= 0.0 || duty_days <= 0.0 || duty_days > period {
                    return Err(ScenarioError::invalid(
                        "schedule",
                        "pulse needs period > 0 and 0 < duty_days <= period",
                    ));
                }
                ControlSchedule::pulse(period, duty_days / period, level)
            }
            other => {
                return Err(ScenarioError::invalid(
                    "schedule",
                    format!("unknown schedule kind `{other}`"),
                ))
            }
        };
    }
    Ok(schedules)
}

/// Simulates each schedule, writing one metrics row per schedule
/// (`strategy_metrics.csv`) and the ranking by peak infected humans
/// (`ranking.csv`).
pub fn cmd_strategy(
    scenario: &Scenario,
    out_dir: &Path,
    schedule_specs: &[String],
) -> Result<RunReport, RunError> {
    let start = Instant::now();
    scenario.validate()?;
    let mut candidates = Vec::new();
    for spec in schedule_specs {
        candidates.push(parse_schedule_spec(scenario, spec)?);
    }

    let mut entries = Vec::new();
    for (index, schedules) in candidates.iter().enumerate() {
        let (_, metrics) = strategies::simulate_schedule(scenario, schedules)?;
        let label = schedules
            .iter()
            .map(|s| s.label())
            .collect::<Vec<_>>()
            .join(" + ");
        entries.push((index, label, metrics));
    }

    let mut csv = String::from("index,label,peak_infected,peak_time,cumulative_infected");
    for name in scenario.model.control_names() {
        let _ = write!(csv, ",total_{name}");
    }
    csv.push('\n');
    for (index, label, metrics) in &entries {
        let _ = write!(
            csv,
            "{index},{label},{},{},{}",
            fmt_value(metrics.peak_infected),
            fmt_value(metrics.peak_time),
            fmt_value(metrics.cumulative_infected)
        );
        for amount in &metrics.total_control_amount {
            let _ = write!(csv, ",{}", fmt_value(*amount));
        }
        csv.push('\n');
    }

    let mut ranked: Vec<&(usize, String, OutbreakMetrics)> = entries.iter().collect();
    ranked.sort_by(|a, b| {
        let amount = |m: &OutbreakMetrics| m.total_control_amount.iter().sum::<f64>();
        (a.2.peak_infected, amount(&a.2))
            .partial_cmp(&(b.2.peak_infected, amount(&b.2)))
            .unwrap()
    });
    let mut ranking = String::from("rank,index,label,peak_infected,total_amount\n");
    for (rank, (index, label, metrics)) in ranked.iter().enumerate() {
        let _ = writeln!(
            ranking,
            "{},{index},{label},{},{}",
            rank + 1,
            fmt_value(metrics.peak_infected),
            fmt_value(metrics.total_control_amount.iter().sum::<f64>())
        );
    }

    let outputs = vec![
        write_file(out_dir, "strategy_metrics.csv", &csv)?,
        write_file(out_dir, "ranking.csv", &ranking)?,
    ];
    let mut summary = BTreeMap::new();
    if let Some(best) = ranked.first() {
        summary.insert("best_index".into(), best.0 as f64);
        summary.insert("best_peak_infected".into(), best.2.peak_infected);
    }
    Ok(RunReport {
        command: "strategy".into(),
        scenario_digest: scenario.digest(),
        outputs,
        summary,
        converged: true,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}
