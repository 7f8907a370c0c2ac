//! Validates the indirect solvers against problems with closed-form
//! optimal solutions: Newton single shooting and the forward-backward
//! sweep on a scalar linear-quadratic problem, and the sweep with a
//! terminal payoff on the tumor-shrinking problem.
//!
//! Run with `cargo run --example analytic_benchmarks`.

use epioc::ocp::benchmarks::{tumor_payoff_demo, LinExpProblem, TumorPayoffProblem};
use epioc::ocp::indirect::{
    single_shooting, sweep, ShootingConfig, SweepConfig, TerminalCondition,
};
use epioc::scenario::TimeGrid;

fn main() {
    let problem = LinExpProblem;
    let grid = TimeGrid {
        t0: 0.0,
        tf: 2.0,
        n_steps: 2000,
    };

    let shot = single_shooting(
        &problem,
        &grid,
        &[problem.x0()],
        &[0.0],
        &TerminalCondition::Transversality,
        &ShootingConfig::default(),
    )
    .unwrap();
    let traj = &shot.trajectory;
    let controls = traj.controls.as_ref().unwrap();
    let costates = traj.costates.as_ref().unwrap();
    let mut err = [0.0_f64; 3];
    for (i, t) in traj.times.iter().enumerate() {
        err[0] = err[0].max((controls[i][0] - problem.u_star(*t)).abs());
        err[1] = err[1].max((traj.states[i][0] - problem.x_star(*t)).abs());
        err[2] = err[2].max((costates[i][0] - problem.lambda_star(*t)).abs());
    }
    println!("single shooting on the linear-quadratic benchmark (h = 1e-3):");
    println!("  max |u - u*|      = {:.2e}", err[0]);
    println!("  max |x - x*|      = {:.2e}", err[1]);
    println!("  max |l - l*|      = {:.2e}", err[2]);
    println!("  terminal costate  = {:+.2e}", costates.last().unwrap()[0]);
    println!("  objective         = {:.8}", shot.objective);

    let swept = sweep(
        &problem,
        &grid,
        &[problem.x0()],
        &SweepConfig {
            tol: 1e-10,
            max_iter: 500,
            relaxation: 0.5,
        },
    )
    .unwrap();
    println!(
        "sweep on the same grid: objective = {:.8} ({} iterations)",
        swept.objective, swept.iterations
    );

    println!("\ntumor payoff problem (alpha = 1, x0 = 1, tf = 1):");
    let reference = TumorPayoffProblem { alpha: 1.0, tf: 1.0 };
    let sol = tumor_payoff_demo(1.0, 1.0, 1.0).unwrap();
    let traj = &sol.trajectory;
    let costates = traj.costates.as_ref().unwrap();
    let mut worst: f64 = 0.0;
    for (i, t) in traj.times.iter().enumerate() {
        worst = worst.max((costates[i][0] - reference.lambda_star(*t)).abs());
        worst = worst.max((traj.states[i][0] - reference.x_star(1.0, *t)).abs());
    }
    println!("  max deviation from closed forms = {worst:.2e}");
    println!(
        "  lambda(tf) = {:.6} (payoff gradient), u*(tf) = {:.6}",
        costates.last().unwrap()[0],
        traj.controls.as_ref().unwrap().last().unwrap()[0]
    );
    println!("  objective = {:.8}", sol.objective);
}
