//! Optimal-control problems and their two solution families: the indirect
//! forward-backward sweep (plus single shooting) in [`indirect`], and the
//! direct transcription with a projected-gradient solver in [`direct`].

pub mod benchmarks;
pub mod direct;
pub mod indirect;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::integrators::{IntegrateError, Trajectory};
use crate::models::{ModelDefinition, ModelError};
use crate::scenario::{
    normalize_scenario, ControlSpec, ParameterSet, Scenario, ScenarioError, TimeGrid,
};

#[derive(Debug, Error)]
pub enum OcError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error("scenario control mode is `{0}`, expected `optimize`")]
    NotOptimizeMode(String),
    #[error("objective increased at iteration {iter}: {previous:e} -> {current:e}")]
    ObjectiveIncreased {
        iter: usize,
        previous: f64,
        current: f64,
    },
    #[error("line search failed at iteration {iter} (step {step:e})")]
    LineSearchFailure { iter: usize, step: f64 },
    #[error("non-finite objective at iteration {iter}")]
    NonFiniteObjective { iter: usize },
    #[error("shooting sensitivity matrix is singular")]
    SingularSensitivity,
    #[error("shooting iteration did not converge (residual {residual:e})")]
    ShootingStalled { residual: f64 },
    #[error("step length {h} does not divide the horizon {span}")]
    NonIntegralStep { h: f64, span: f64 },
}

/// Dynamics-plus-cost view used by the direct solver.
pub trait OcDynamics {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;
    fn bounds(&self) -> Vec<(f64, f64)>;
    fn rhs(&self, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]);
    fn running_cost(&self, t: f64, x: &[f64], u: &[f64]) -> f64;

    /// Payoff term evaluated at the final state (zero for pure Lagrange
    /// objectives).
    fn terminal_cost(&self, _xf: &[f64]) -> f64 {
        0.0
    }

    /// Starting control guess, projected into the bounds.
    fn control_guess(&self) -> Vec<f64> {
        self.bounds().iter().map(|(lo, hi)| 0.0_f64.clamp(*lo, *hi)).collect()
    }
}

/// Full first-order optimality system for the indirect solvers.
pub trait OcPmp: OcDynamics {
    fn adjoint_rhs(&self, t: f64, x: &[f64], lambda: &[f64], u: &[f64], dl: &mut [f64]);
    fn control_law(&self, t: f64, x: &[f64], lambda: &[f64], u: &mut [f64]);

    /// Transversality condition; zero unless the objective carries a payoff.
    fn terminal_costate(&self, _xf: &[f64], lf: &mut [f64]) {
        lf.fill(0.0);
    }

    fn hamiltonian(&self, t: f64, x: &[f64], lambda: &[f64], u: &[f64]) -> f64 {
        let mut dx = vec![0.0; self.state_dim()];
        self.rhs(t, x, u, &mut dx);
        let dot: f64 = lambda.iter().zip(&dx).map(|(l, d)| l * d).sum();
        self.running_cost(t, x, u) + dot
    }
}

/// `dH/du` by central differences, for stationarity checks.
pub fn hamiltonian_control_gradient(
    problem: &dyn OcPmp,
    t: f64,
    x: &[f64],
    lambda: &[f64],
    u: &[f64],
) -> Vec<f64> {
    let mut grad = vec![0.0; u.len()];
    let mut up = u.to_vec();
    let mut um = u.to_vec();
    for j in 0..u.len() {
        let h = 1e-7 * u[j].abs().max(1.0);
        up[j] = u[j] + h;
        um[j] = u[j] - h;
        grad[j] = (problem.hamiltonian(t, x, lambda, &up) - problem.hamiltonian(t, x, lambda, &um))
            / (2.0 * h);
        up[j] = u[j];
        um[j] = u[j];
    }
    grad
}

/// A catalog model bound to parameters, weights and control bounds.
pub struct CatalogProblem {
    def: ModelDefinition,
    params: ParameterSet,
    weights: BTreeMap<String, f64>,
    bounds: Vec<(f64, f64)>,
    field: Box<dyn Fn(f64, &[f64], &[f64], &mut [f64])>,
}

impl CatalogProblem {
    pub fn new(
        def: ModelDefinition,
        params: ParameterSet,
        weights: BTreeMap<String, f64>,
        bounds: Vec<(f64, f64)>,
    ) -> Result<Self, OcError> {
        // surface adjoint/law availability problems at construction
        let x = vec![0.0; def.state_dim()];
        let l = vec![0.0; def.state_dim()];
        let u = vec![0.0; def.control_dim()];
        def.adjoint_rhs(&params, &weights, 0.0, &x, &l, &u)?;
        def.control_law(&params, &weights, &x, &l, &bounds)?;
        let field = Box::new(def.field(&params));
        Ok(CatalogProblem {
            def,
            params,
            weights,
            bounds,
            field,
        })
    }

    pub fn definition(&self) -> ModelDefinition {
        self.def
    }
}

impl OcDynamics for CatalogProblem {
    fn state_dim(&self) -> usize {
        self.def.state_dim()
    }

    fn control_dim(&self) -> usize {
        self.def.control_dim()
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.bounds.clone()
    }

    fn rhs(&self, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) {
        (self.field)(t, x, u, dx);
    }

    fn running_cost(&self, t: f64, x: &[f64], u: &[f64]) -> f64 {
        self.def.running_cost(&self.weights, t, x, u)
    }

    fn control_guess(&self) -> Vec<f64> {
        self.def
            .id()
            .neutral_controls()
            .iter()
            .zip(&self.bounds)
            .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
            .collect()
    }
}

impl OcPmp for CatalogProblem {
    fn adjoint_rhs(&self, t: f64, x: &[f64], lambda: &[f64], u: &[f64], dl: &mut [f64]) {
        let v = self
            .def
            .adjoint_rhs(&self.params, &self.weights, t, x, lambda, u)
            .expect("validated at construction");
        dl.copy_from_slice(&v);
    }

    fn control_law(&self, _t: f64, x: &[f64], lambda: &[f64], u: &mut [f64]) {
        let v = self
            .def
            .control_law(&self.params, &self.weights, x, lambda, &self.bounds)
            .expect("validated at construction");
        u.copy_from_slice(&v);
    }
}

/// A complete catalog optimal-control problem.
pub struct OcProblem {
    pub grid: TimeGrid,
    pub initial: Vec<f64>,
    pub problem: CatalogProblem,
}

impl OcProblem {
    /// Builds the problem from an optimize-mode scenario. Host-vector
    /// scenarios are normalized first (the solvers run on the fractional
    /// form).
    pub fn from_scenario(s: &Scenario) -> Result<Self, OcError> {
        let (lower, upper) = match &s.control {
            ControlSpec::Optimize { lower, upper } => (lower.clone(), upper.clone()),
            other => return Err(OcError::NotOptimizeMode(other.mode().to_string())),
        };
        let s = if s.model.is_host_vector() {
            normalize_scenario(s)?
        } else {
            s.clone()
        };
        let def = ModelDefinition::for_scenario(&s);
        let bounds: Vec<(f64, f64)> = lower.into_iter().zip(upper).collect();
        let problem = CatalogProblem::new(def, s.params.clone(), s.weights.clone(), bounds)?;
        Ok(OcProblem {
            grid: s.grid,
            initial: s.initial.to_vec(),
            problem,
        })
    }
}

/// Converged solution: trajectory with controls (and costates for the
/// indirect method), objective value and convergence diagnostics.
#[derive(Debug, Clone)]
pub struct OcSolution {
    pub trajectory: Trajectory,
    /// Simpson quadrature of the running cost (plus payoff) along the
    /// returned trajectory — the same metric for every solver.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_relative_change: f64,
    /// The solver's own objective after each accepted iteration; for the
    /// direct method this is the transcribed NLP objective.
    pub objective_history: Vec<f64>,
}

impl OcSolution {
    /// Final value of the solver's internal objective.
    pub fn solver_objective(&self) -> f64 {
        *self.objective_history.last().expect("non-empty history")
    }
}

/// Composite Simpson quadrature over a uniform grid; a 3/8 tail handles an
/// odd interval count.
pub fn simpson_quadrature(times: &[f64], values: &[f64]) -> f64 {
    assert_eq!(times.len(), values.len());
    let n = times.len() - 1;
    if n == 0 {
        return 0.0;
    }
    let h = (times[n] - times[0]) / n as f64;
    if n == 1 {
        return 0.5 * h * (values[0] + values[1]);
    }
    let simpson_upto = |k: usize| -> f64 {
        // k intervals, k even
        let mut acc = values[0] + values[k];
        let mut i = 1;
        while i < k {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * values[i];
            i += 1;
        }
        acc * h / 3.0
    };
    if n.is_multiple_of(2) {
        simpson_upto(n)
    } else if n >= 3 {
        let head = if n > 3 { simpson_upto(n - 3) } else { 0.0 };
        let tail = 3.0 * h / 8.0
            * (values[n - 3] + 3.0 * values[n - 2] + 3.0 * values[n - 1] + values[n]);
        head + tail
    } else {
        0.5 * h * (values[0] + values[1])
    }
}

/// Objective of a trajectory: Simpson quadrature of the running cost plus
/// the terminal payoff.
pub fn trajectory_objective<P: OcDynamics + ?Sized>(problem: &P, traj: &Trajectory) -> f64 {
    let controls = traj.controls.as_ref().expect("controls present");
    let values: Vec<f64> = traj
        .times
        .iter()
        .zip(&traj.states)
        .zip(controls)
        .map(|((t, x), u)| problem.running_cost(*t, x, u))
        .collect();
    simpson_quadrature(&traj.times, &values) + problem.terminal_cost(traj.final_state())
}
