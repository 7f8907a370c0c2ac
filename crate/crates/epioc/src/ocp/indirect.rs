//! Indirect solvers: the forward-backward sweep on the first-order
//! optimality system, and a Newton single-shooting solver for the
//! two-point boundary value problem.

use crate::integrators::Trajectory;
use crate::linalg::{self, Mat};
use crate::ocp::{trajectory_objective, OcError, OcPmp, OcSolution};
use crate::scenario::TimeGrid;

#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Control-update damping: `u <- (1-w) u_prev + w u_law`.
    pub relaxation: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            tol: 1e-4,
            max_iter: 200,
            relaxation: 0.5,
        }
    }
}

fn avg(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

fn check_finite(row: &[f64], t: f64) -> Result<(), OcError> {
    if row.iter().any(|v| !v.is_finite()) {
        return Err(OcError::Integrate(
            crate::integrators::IntegrateError::NonFiniteState { t },
        ));
    }
    Ok(())
}

/// RK4 state pass with endpoint-averaged controls at the half step.
fn forward_states(
    problem: &dyn OcPmp,
    times: &[f64],
    x0: &[f64],
    controls: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>, OcError> {
    let n = times.len();
    let dim = problem.state_dim();
    let mut states = Vec::with_capacity(n);
    states.push(x0.to_vec());
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut stage = vec![0.0; dim];
    for i in 0..n - 1 {
        let h = times[i + 1] - times[i];
        let h2 = 0.5 * h;
        let u_mid = avg(&controls[i], &controls[i + 1]);
        let x = states[i].clone();
        problem.rhs(times[i], &x, &controls[i], &mut k1);
        for j in 0..dim {
            stage[j] = x[j] + h2 * k1[j];
        }
        problem.rhs(times[i] + h2, &stage, &u_mid, &mut k2);
        for j in 0..dim {
            stage[j] = x[j] + h2 * k2[j];
        }
        problem.rhs(times[i] + h2, &stage, &u_mid, &mut k3);
        for j in 0..dim {
            stage[j] = x[j] + h * k3[j];
        }
        problem.rhs(times[i + 1], &stage, &controls[i + 1], &mut k4);
        let next: Vec<f64> = (0..dim)
            .map(|j| x[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
            .collect();
        check_finite(&next, times[i + 1])?;
        states.push(next);
    }
    Ok(states)
}

/// RK4 adjoint pass, backward in time; states and controls are
/// interpolated by endpoint averaging inside each step.
fn backward_costates(
    problem: &dyn OcPmp,
    times: &[f64],
    states: &[Vec<f64>],
    controls: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>, OcError> {
    let n = times.len();
    let dim = problem.state_dim();
    let mut costates = vec![vec![0.0; dim]; n];
    problem.terminal_costate(&states[n - 1], &mut costates[n - 1]);

    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut stage = vec![0.0; dim];
    for i in (1..n).rev() {
        // integrate from t_i down to t_{i-1}
        let h = times[i - 1] - times[i];
        let h2 = 0.5 * h;
        let x_mid = avg(&states[i], &states[i - 1]);
        let u_mid = avg(&controls[i], &controls[i - 1]);
        let l = costates[i].clone();

        problem.adjoint_rhs(times[i], &states[i], &l, &controls[i], &mut k1);
        for j in 0..dim {
            stage[j] = l[j] + h2 * k1[j];
        }
        problem.adjoint_rhs(times[i] + h2, &x_mid, &stage, &u_mid, &mut k2);
        for j in 0..dim {
            stage[j] = l[j] + h2 * k2[j];
        }
        problem.adjoint_rhs(times[i] + h2, &x_mid, &stage, &u_mid, &mut k3);
        for j in 0..dim {
            stage[j] = l[j] + h * k3[j];
        }
        problem.adjoint_rhs(times[i - 1], &states[i - 1], &stage, &controls[i - 1], &mut k4);
        let next: Vec<f64> = (0..dim)
            .map(|j| l[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
            .collect();
        check_finite(&next, times[i - 1])?;
        costates[i - 1] = next;
    }
    Ok(costates)
}

fn relative_change(new: &[Vec<f64>], old: &[Vec<f64>]) -> f64 {
    let mut diff = 0.0_f64;
    let mut norm = 0.0_f64;
    for (a, b) in new.iter().zip(old) {
        for (x, y) in a.iter().zip(b) {
            diff = diff.max((x - y).abs());
            norm = norm.max(x.abs());
        }
    }
    diff / (norm + 1e-12)
}

fn objective_on(
    problem: &dyn OcPmp,
    times: &[f64],
    states: &[Vec<f64>],
    controls: &[Vec<f64>],
) -> f64 {
    let values: Vec<f64> = times
        .iter()
        .zip(states)
        .zip(controls)
        .map(|((t, x), u)| problem.running_cost(*t, x, u))
        .collect();
    super::simpson_quadrature(times, &values) + problem.terminal_cost(states.last().unwrap())
}

/// Forward-backward sweep: states forward, costates backward, control
/// update through the pointwise law, repeated until the largest relative
/// change across states, costates and controls falls below `tol`.
pub fn sweep(
    problem: &dyn OcPmp,
    grid: &TimeGrid,
    x0: &[f64],
    config: &SweepConfig,
) -> Result<OcSolution, OcError> {
    let times = grid.nodes();
    let n = times.len();
    let m = problem.control_dim();
    let w = config.relaxation;

    let mut controls = vec![problem.control_guess(); n];
    let mut states = forward_states(problem, &times, x0, &controls)?;
    let mut costates = backward_costates(problem, &times, &states, &controls)?;
    let mut objective = objective_on(problem, &times, &states, &controls);
    let mut history = vec![objective];

    let mut converged = false;
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    // the configured relaxation is an upper limit: steps that would raise
    // the objective are rejected and retried with stronger damping
    let mut damping = w;
    for iter in 1..=config.max_iter {
        iterations = iter;
        let mut law_controls = vec![vec![0.0; m]; n];
        for i in 0..n {
            problem.control_law(times[i], &states[i], &costates[i], &mut law_controls[i]);
        }

        let mut accepted = None;
        while accepted.is_none() {
            let mut new_controls = controls.clone();
            for i in 0..n {
                for j in 0..m {
                    new_controls[i][j] =
                        (1.0 - damping) * controls[i][j] + damping * law_controls[i][j];
                }
            }
            let new_states = forward_states(problem, &times, x0, &new_controls)?;
            let new_objective = objective_on(problem, &times, &new_states, &new_controls);
            if !new_objective.is_finite() {
                return Err(OcError::NonFiniteObjective { iter });
            }
            if new_objective <= objective + 1e-12 * objective.abs().max(1.0) {
                accepted = Some((new_controls, new_states, new_objective));
            } else {
                damping *= 0.5;
                if damping < 1e-4 {
                    return Err(OcError::ObjectiveIncreased {
                        iter,
                        previous: objective,
                        current: new_objective,
                    });
                }
            }
        }
        let (new_controls, new_states, new_objective) = accepted.unwrap();
        let new_costates = backward_costates(problem, &times, &new_states, &new_controls)?;

        change = relative_change(&new_states, &states)
            .max(relative_change(&new_costates, &costates))
            .max(relative_change(&new_controls, &controls));

        states = new_states;
        costates = new_costates;
        controls = new_controls;
        objective = new_objective;
        history.push(objective);
        damping = (2.0 * damping).min(w);

        if change < config.tol {
            converged = true;
            break;
        }
    }

    Ok(OcSolution {
        trajectory: Trajectory {
            times,
            states,
            controls: Some(controls),
            costates: Some(costates),
        },
        objective,
        iterations,
        converged,
        final_relative_change: change,
        objective_history: history,
    })
}

/// Largest stationarity violation of a converged sweep solution:
/// `|dH/du|` at interior control nodes; at clamped nodes a violation is a
/// descent direction pointing back into the box.
pub fn stationarity_violation(problem: &dyn OcPmp, solution: &OcSolution) -> f64 {
    let traj = &solution.trajectory;
    let controls = traj.controls.as_ref().expect("controls");
    let costates = traj.costates.as_ref().expect("costates");
    let bounds = problem.bounds();
    let mut worst = 0.0_f64;
    for i in 0..traj.times.len() {
        let grad = super::hamiltonian_control_gradient(
            problem,
            traj.times[i],
            &traj.states[i],
            &costates[i],
            &controls[i],
        );
        for (j, g) in grad.iter().enumerate() {
            let (lo, hi) = bounds[j];
            let u = controls[i][j];
            let margin = 1e-6 * (hi - lo).abs().max(1.0);
            let at_lower = u - lo <= margin;
            let at_upper = hi - u <= margin;
            let violation = if at_lower {
                (-g).max(0.0) // dH/du < 0 would push below the box
            } else if at_upper {
                g.max(0.0)
            } else {
                g.abs()
            };
            worst = worst.max(violation);
        }
    }
    worst
}

#[derive(Debug, Clone, Copy)]
pub struct ShootingConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        ShootingConfig {
            tol: 1e-10,
            max_iter: 50,
        }
    }
}

/// Boundary condition matched by the shooting residual.
pub enum TerminalCondition {
    /// Free terminal state: the costate must satisfy transversality.
    Transversality,
    /// Fixed terminal state.
    FixedState(Vec<f64>),
}

type NodeRows = Vec<Vec<f64>>;

/// Propagates the coupled state/costate system with the control eliminated
/// by the pointwise law.
fn propagate(
    problem: &dyn OcPmp,
    times: &[f64],
    x0: &[f64],
    lambda0: &[f64],
) -> Result<(NodeRows, NodeRows, NodeRows), OcError> {
    let dim = problem.state_dim();
    let m = problem.control_dim();
    let coupled = |t: f64, z: &[f64], dz: &mut [f64]| {
        let (x, l) = z.split_at(dim);
        let mut u = vec![0.0; m];
        problem.control_law(t, x, l, &mut u);
        let (dx, dl) = dz.split_at_mut(dim);
        problem.rhs(t, x, &u, dx);
        problem.adjoint_rhs(t, x, l, &u, dl);
    };

    let mut z: Vec<f64> = x0.iter().chain(lambda0.iter()).copied().collect();
    let n2 = 2 * dim;
    let mut states = Vec::with_capacity(times.len());
    let mut costates = Vec::with_capacity(times.len());
    let mut controls = Vec::with_capacity(times.len());
    let mut k1 = vec![0.0; n2];
    let mut k2 = vec![0.0; n2];
    let mut k3 = vec![0.0; n2];
    let mut k4 = vec![0.0; n2];
    let mut stage = vec![0.0; n2];
    let record =
        |z: &[f64], t: f64, states: &mut Vec<Vec<f64>>, costates: &mut Vec<Vec<f64>>, controls: &mut Vec<Vec<f64>>| {
            let (x, l) = z.split_at(dim);
            let mut u = vec![0.0; m];
            problem.control_law(t, x, l, &mut u);
            states.push(x.to_vec());
            costates.push(l.to_vec());
            controls.push(u);
        };
    record(&z, times[0], &mut states, &mut costates, &mut controls);
    for i in 0..times.len() - 1 {
        let h = times[i + 1] - times[i];
        let h2 = 0.5 * h;
        coupled(times[i], &z, &mut k1);
        for j in 0..n2 {
            stage[j] = z[j] + h2 * k1[j];
        }
        coupled(times[i] + h2, &stage, &mut k2);
        for j in 0..n2 {
            stage[j] = z[j] + h2 * k2[j];
        }
        coupled(times[i] + h2, &stage, &mut k3);
        for j in 0..n2 {
            stage[j] = z[j] + h * k3[j];
        }
        coupled(times[i + 1], &stage, &mut k4);
        for j in 0..n2 {
            z[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        check_finite(&z, times[i + 1])?;
        record(&z, times[i + 1], &mut states, &mut costates, &mut controls);
    }
    Ok((states, costates, controls))
}

fn shooting_residual(
    problem: &dyn OcPmp,
    times: &[f64],
    x0: &[f64],
    lambda0: &[f64],
    terminal: &TerminalCondition,
) -> Result<Vec<f64>, OcError> {
    let (states, costates, _) = propagate(problem, times, x0, lambda0)?;
    let xf = states.last().unwrap();
    let lf = costates.last().unwrap();
    Ok(match terminal {
        TerminalCondition::Transversality => {
            let mut target = vec![0.0; lf.len()];
            problem.terminal_costate(xf, &mut target);
            lf.iter().zip(&target).map(|(a, b)| a - b).collect()
        }
        TerminalCondition::FixedState(target) => {
            xf.iter().zip(target).map(|(a, b)| a - b).collect()
        }
    })
}

/// Newton iteration on the unknown initial costate, with finite-difference
/// sensitivities of the boundary mismatch.
pub fn single_shooting(
    problem: &dyn OcPmp,
    grid: &TimeGrid,
    x0: &[f64],
    guess: &[f64],
    terminal: &TerminalCondition,
    config: &ShootingConfig,
) -> Result<OcSolution, OcError> {
    let times = grid.nodes();
    let dim = problem.state_dim();
    let mut lambda0 = guess.to_vec();
    let mut residual = shooting_residual(problem, &times, x0, &lambda0, terminal)?;
    let norm = |r: &[f64]| r.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let mut best = norm(&residual);
    let mut iterations = 0;

    for iter in 1..=config.max_iter {
        iterations = iter;
        if best < config.tol {
            break;
        }
        // finite-difference sensitivity of the residual
        let mut jac = Mat::zeros(dim, dim);
        for j in 0..dim {
            let h = 1e-6 * lambda0[j].abs().max(1.0);
            let mut lp = lambda0.clone();
            let mut lm = lambda0.clone();
            lp[j] += h;
            lm[j] -= h;
            let rp = shooting_residual(problem, &times, x0, &lp, terminal)?;
            let rm = shooting_residual(problem, &times, x0, &lm, terminal)?;
            for i in 0..dim {
                jac.set(i, j, (rp[i] - rm[i]) / (2.0 * h));
            }
        }
        let step = linalg::lu_solve(&jac, &residual).ok_or(OcError::SingularSensitivity)?;
        let mut damping = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = lambda0
                .iter()
                .zip(&step)
                .map(|(l, s)| l - damping * s)
                .collect();
            let r = shooting_residual(problem, &times, x0, &trial, terminal)?;
            let rn = norm(&r);
            if rn < best {
                lambda0 = trial;
                residual = r;
                best = rn;
                improved = true;
                break;
            }
            damping *= 0.5;
        }
        if !improved {
            break;
        }
    }

    if best >= config.tol {
        return Err(OcError::ShootingStalled { residual: best });
    }

    let (states, costates, controls) = propagate(problem, &times, x0, &lambda0)?;
    let trajectory = Trajectory {
        times,
        states,
        controls: Some(controls),
        costates: Some(costates),
    };
    let objective = trajectory_objective(problem, &trajectory);
    Ok(OcSolution {
        trajectory,
        objective,
        iterations,
        converged: true,
        final_relative_change: best,
        objective_history: vec![objective],
    })
}
