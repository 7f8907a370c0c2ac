//! Non-optimal control policies: constant and pulse spraying schedules,
//! outbreak metrics with exact budget accounting, strategy rankings and
//! parameter sweeps.

use thiserror::Error;

use crate::integrators::{self, IntegrateError, Method, Trajectory};
use crate::models::ModelDefinition;
use crate::scenario::{Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error("expected {expected} schedules for model {model}, got {got}")]
    ScheduleMismatch {
        model: String,
        expected: usize,
        got: usize,
    },
    #[error("strategy comparison needs at least two candidates, got {0}")]
    TooFewStrategies(usize),
    #[error("unknown sweep knob `{0}`")]
    UnknownKnob(String),
}

/// One control's schedule over the scenario horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlSchedule {
    Constant { level: f64 },
    /// `level` for the first `duty` fraction of each period (starting at
    /// t0), the neutral level otherwise.
    Pulse { period: f64, duty: f64, level: f64 },
}

impl ControlSchedule {
    pub fn constant(level: f64) -> Self {
        ControlSchedule::Constant { level }
    }

    pub fn pulse(period: f64, duty: f64, level: f64) -> Self {
        ControlSchedule::Pulse {
            period,
            duty,
            level,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ControlSchedule::Constant { level } => format!("constant({level})"),
            ControlSchedule::Pulse {
                period,
                duty,
                level,
            } => format!("pulse(period={period},duty={duty},level={level})"),
        }
    }

    fn value(&self, t: f64, t0: f64, off_level: f64) -> f64 {
        match self {
            ControlSchedule::Constant { level } => *level,
            ControlSchedule::Pulse {
                period,
                duty,
                level,
            } => {
                let phase = (t - t0).rem_euclid(*period);
                if phase < duty * period {
                    *level
                } else {
                    off_level
                }
            }
        }
    }

    /// Times in `(t0, tf)` where the control value actually changes.
    fn switch_times(&self, t0: f64, tf: f64, off_level: f64) -> Vec<f64> {
        match self {
            ControlSchedule::Constant { .. } => Vec::new(),
            ControlSchedule::Pulse {
                period,
                duty,
                level,
            } => {
                if (*level - off_level).abs() == 0.0 || *duty >= 1.0 {
                    return Vec::new();
                }
                let mut times = Vec::new();
                let mut start = t0;
                while start < tf {
                    let off = start + duty * period;
                    if off > t0 && off < tf {
                        times.push(off);
                    }
                    let next = start + period;
                    if next > t0 && next < tf {
                        times.push(next);
                    }
                    start = next;
                }
                times
            }
        }
    }

    /// Exact integral of the scheduled level over a horizon of length `t`:
    /// full pulses plus the clipped final one.
    pub fn total_amount(&self, horizon: f64) -> f64 {
        match self {
            ControlSchedule::Constant { level } => level * horizon,
            ControlSchedule::Pulse {
                period,
                duty,
                level,
            } => {
                let duty_span = duty * period;
                let full = (horizon / period + 1e-12).floor();
                let remainder = horizon - full * period;
                level * (duty_span * full + remainder.min(duty_span))
            }
        }
    }
}

/// Aggregate outbreak measures of one simulated trajectory.
#[derive(Debug, Clone)]
pub struct OutbreakMetrics {
    pub peak_infected: f64,
    pub peak_time: f64,
    /// Attack measure: quadrature of the new-infection inflow, which keeps
    /// growing while the infected compartment itself drains.
    pub cumulative_infected: f64,
    pub total_control_amount: Vec<f64>,
    pub final_state: Vec<f64>,
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Outbreak metrics of an already-computed trajectory: control budgets are
/// exact schedule integrals, trajectory quantities use the composite
/// trapezoid on the grid.
pub fn trajectory_metrics(
    scenario: &Scenario,
    traj: &Trajectory,
    schedules: &[ControlSchedule],
) -> OutbreakMetrics {
    let def = ModelDefinition::for_scenario(scenario);
    metrics_from(scenario, &def, traj, schedules)
}

fn metrics_from(
    scenario: &Scenario,
    def: &ModelDefinition,
    traj: &Trajectory,
    schedules: &[ControlSchedule],
) -> OutbreakMetrics {
    let idx = scenario.model.infected_human_index();
    let mut peak = f64::NEG_INFINITY;
    let mut peak_time = traj.times[0];
    for (t, row) in traj.times.iter().zip(&traj.states) {
        if row[idx] > peak {
            peak = row[idx];
            peak_time = *t;
        }
    }
    let incidence: Vec<f64> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, x)| def.incidence(&scenario.params, *t, x))
        .collect();
    let horizon = scenario.grid.tf - scenario.grid.t0;
    OutbreakMetrics {
        peak_infected: peak,
        peak_time,
        cumulative_infected: trapezoid(&traj.times, &incidence),
        total_control_amount: schedules.iter().map(|s| s.total_amount(horizon)).collect(),
        final_state: traj.final_state().to_vec(),
    }
}

/// Simulates the scenario under per-control schedules. Integration is
/// segmented at the schedule switch points, so pulse edges are exact; the
/// trajectory is reported on the scenario grid.
pub fn simulate_schedule(
    scenario: &Scenario,
    schedules: &[ControlSchedule],
) -> Result<(Trajectory, OutbreakMetrics), StrategyError> {
    let model = scenario.model;
    if schedules.len() != model.control_dim() {
        return Err(StrategyError::ScheduleMismatch {
            model: model.name().to_string(),
            expected: model.control_dim(),
            got: schedules.len(),
        });
    }
    let def = ModelDefinition::for_scenario(scenario);
    let field = def.field(&scenario.params);
    let (t0, tf) = (scenario.grid.t0, scenario.grid.tf);
    let neutral = model.neutral_controls();

    // segment boundaries where any control value changes
    let mut events: Vec<f64> = schedules
        .iter()
        .zip(&neutral)
        .flat_map(|(s, off)| s.switch_times(t0, tf, *off))
        .collect();
    events.sort_by(|a, b| a.partial_cmp(b).unwrap());
    events.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (tf - t0));

    let nodes = scenario.grid.nodes();
    let sample = |t: f64| -> Vec<f64> {
        schedules
            .iter()
            .zip(&neutral)
            .map(|(s, off)| s.value(t, t0, *off))
            .collect()
    };

    let mut bounds = Vec::with_capacity(events.len() + 2);
    bounds.push(t0);
    bounds.extend(events);
    bounds.push(tf);

    let mut states: Vec<Vec<f64>> = Vec::with_capacity(nodes.len());
    states.push(scenario.initial.to_vec());
    let mut current = scenario.initial.to_vec();
    let mut next_node = 1;
    let eps = 1e-12 * (tf - t0);

    for seg in bounds.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b - a <= eps {
            continue;
        }
        // control is constant inside the open segment
        let u = sample(0.5 * (a + b));
        let mut seg_times = vec![a];
        let mut node_slots = Vec::new();
        while next_node < nodes.len() && nodes[next_node] <= b + eps {
            let t = nodes[next_node].min(b);
            if t - seg_times.last().unwrap() > eps {
                seg_times.push(t);
            }
            node_slots.push(seg_times.len() - 1);
            next_node += 1;
        }
        if *seg_times.last().unwrap() < b - eps {
            seg_times.push(b);
        }
        if seg_times.len() < 2 {
            continue;
        }
        let controls = integrators::constant_controls(&u, seg_times.len());
        let traj = integrators::integrate(&field, &seg_times, &current, &controls, Method::Rk45)?;
        for slot in node_slots {
            states.push(traj.states[slot].clone());
        }
        current = traj.final_state().to_vec();
    }
    while states.len() < nodes.len() {
        states.push(current.clone());
    }

    let controls: Vec<Vec<f64>> = nodes.iter().map(|t| sample(*t)).collect();
    let traj = Trajectory {
        times: nodes,
        states,
        controls: Some(controls),
        costates: None,
    };
    let metrics = metrics_from(scenario, &def, &traj, schedules);
    Ok((traj, metrics))
}

/// One ranked entry of a strategy comparison.
#[derive(Debug, Clone)]
pub struct RankedStrategy {
    /// Position in the input list.
    pub index: usize,
    pub label: String,
    pub metrics: OutbreakMetrics,
}

/// Ranks strategies by peak infected humans (lower is better), ties broken
/// by total control amount; equal strategies keep their input order.
pub fn compare_strategies(
    scenario: &Scenario,
    candidates: &[Vec<ControlSchedule>],
) -> Result<Vec<RankedStrategy>, StrategyError> {
    if candidates.len() < 2 {
        return Err(StrategyError::TooFewStrategies(candidates.len()));
    }
    let mut ranked = Vec::with_capacity(candidates.len());
    for (index, schedules) in candidates.iter().enumerate() {
        let (_, metrics) = simulate_schedule(scenario, schedules)?;
        let label = schedules
            .iter()
            .map(|s| s.label())
            .collect::<Vec<_>>()
            .join(" + ");
        ranked.push(RankedStrategy {
            index,
            label,
            metrics,
        });
    }
    ranked.sort_by(|a, b| {
        let amount = |m: &OutbreakMetrics| m.total_control_amount.iter().sum::<f64>();
        (a.metrics.peak_infected, amount(&a.metrics))
            .partial_cmp(&(b.metrics.peak_infected, amount(&b.metrics)))
            .unwrap()
    });
    Ok(ranked)
}

/// Runs one simulation per knob value (a parameter name or a constant
/// control name); results keep the input order.
pub fn parameter_sweep(
    scenario: &Scenario,
    knob: &str,
    values: &[f64],
) -> Result<Vec<(f64, OutbreakMetrics)>, StrategyError> {
    let model = scenario.model;
    let control_pos = model.control_names().iter().position(|n| *n == knob);
    if control_pos.is_none() && !scenario.params.contains(knob) {
        return Err(StrategyError::UnknownKnob(knob.to_string()));
    }
    let base_levels = scenario.control.constant_levels(model);
    let mut out = Vec::with_capacity(values.len());
    for value in values {
        let mut s = scenario.clone();
        let mut levels = base_levels.clone();
        match control_pos {
            Some(i) => levels[i] = *value,
            None => s.params.set(knob, *value),
        }
        let schedules: Vec<ControlSchedule> =
            levels.iter().map(|l| ControlSchedule::constant(*l)).collect();
        let (_, metrics) = simulate_schedule(&s, &schedules)?;
        out.push((*value, metrics));
    }
    Ok(out)
}
