//! Analytic benchmark problems with closed-form optimal solutions, used to
//! validate the solvers end to end.

use crate::ocp::indirect::{sweep, SweepConfig};
use crate::ocp::{OcDynamics, OcError, OcPmp, OcSolution};
use crate::scenario::TimeGrid;

/// Scalar problem `min J = int_0^2 (x + u^2/2) dt` with `x' = x + u` and
/// `x(0) = e^2/2 - 1`. The optimality system solves in closed form:
/// `lambda = e^{2-t} - 1`, `u* = 1 - e^{2-t}`, `x* = e^{2-t}/2 - 1`.
pub struct LinExpProblem;

impl LinExpProblem {
    pub const TF: f64 = 2.0;

    pub fn x0(&self) -> f64 {
        0.5 * (2.0_f64).exp() - 1.0
    }

    pub fn lambda_star(&self, t: f64) -> f64 {
        (Self::TF - t).exp() - 1.0
    }

    pub fn u_star(&self, t: f64) -> f64 {
        1.0 - (Self::TF - t).exp()
    }

    pub fn x_star(&self, t: f64) -> f64 {
        0.5 * (Self::TF - t).exp() - 1.0
    }
}

impl OcDynamics for LinExpProblem {
    fn state_dim(&self) -> usize {
        1
    }

    fn control_dim(&self) -> usize {
        1
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(f64::NEG_INFINITY, f64::INFINITY)]
    }

    fn rhs(&self, _t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) {
        dx[0] = x[0] + u[0];
    }

    fn running_cost(&self, _t: f64, x: &[f64], u: &[f64]) -> f64 {
        x[0] + 0.5 * u[0] * u[0]
    }

    fn control_guess(&self) -> Vec<f64> {
        vec![0.0]
    }
}

impl OcPmp for LinExpProblem {
    fn adjoint_rhs(&self, _t: f64, _x: &[f64], lambda: &[f64], _u: &[f64], dl: &mut [f64]) {
        dl[0] = -1.0 - lambda[0];
    }

    fn control_law(&self, _t: f64, _x: &[f64], lambda: &[f64], u: &mut [f64]) {
        u[0] = -lambda[0];
    }
}

/// Tumor-shrinking problem with a terminal payoff:
/// `min x(tf) + int_0^tf u^2 dt`, `x' = alpha x - u`. Closed forms:
/// `lambda = e^{alpha (tf - t)}`, `u* = lambda / 2` and
/// `x* = x0 e^{alpha t} + e^{alpha tf} (e^{-alpha t} - e^{alpha t})/(4 alpha)`.
pub struct TumorPayoffProblem {
    pub alpha: f64,
    pub tf: f64,
}

impl TumorPayoffProblem {
    pub fn lambda_star(&self, t: f64) -> f64 {
        (self.alpha * (self.tf - t)).exp()
    }

    pub fn u_star(&self, t: f64) -> f64 {
        0.5 * self.lambda_star(t)
    }

    pub fn x_star(&self, x0: f64, t: f64) -> f64 {
        x0 * (self.alpha * t).exp()
            + (self.alpha * self.tf).exp()
                * ((-self.alpha * t).exp() - (self.alpha * t).exp())
                / (4.0 * self.alpha)
    }
}

impl OcDynamics for TumorPayoffProblem {
    fn state_dim(&self) -> usize {
        1
    }

    fn control_dim(&self) -> usize {
        1
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(f64::NEG_INFINITY, f64::INFINITY)]
    }

    fn rhs(&self, _t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) {
        dx[0] = self.alpha * x[0] - u[0];
    }

    fn running_cost(&self, _t: f64, _x: &[f64], u: &[f64]) -> f64 {
        u[0] * u[0]
    }

    fn terminal_cost(&self, xf: &[f64]) -> f64 {
        xf[0]
    }

    fn control_guess(&self) -> Vec<f64> {
        vec![0.0]
    }
}

impl OcPmp for TumorPayoffProblem {
    fn adjoint_rhs(&self, _t: f64, _x: &[f64], lambda: &[f64], _u: &[f64], dl: &mut [f64]) {
        dl[0] = -self.alpha * lambda[0];
    }

    fn control_law(&self, _t: f64, _x: &[f64], lambda: &[f64], u: &mut [f64]) {
        u[0] = 0.5 * lambda[0];
    }

    /// Payoff `phi(x) = x`, so the terminal costate is 1.
    fn terminal_costate(&self, _xf: &[f64], lf: &mut [f64]) {
        lf[0] = 1.0;
    }
}

/// Solves the payoff benchmark by sweep on a 1000-step grid.
pub fn tumor_payoff_demo(alpha: f64, x0: f64, tf: f64) -> Result<OcSolution, OcError> {
    assert!(alpha > 0.0, "growth factor must be positive");
    let problem = TumorPayoffProblem { alpha, tf };
    let grid = TimeGrid {
        t0: 0.0,
        tf,
        n_steps: 1000,
    };
    let config = SweepConfig {
        tol: 1e-12,
        max_iter: 200,
        relaxation: 0.5,
    };
    sweep(&problem, &grid, &[x0], &config)
}
