//! Vaccination as a control: solves the epidemic and endemic scenarios
//! with both solution families and compares against the do-nothing and
//! full-capacity policies.
//!
//! Run with `cargo run --example optimal_vaccination`.

use epioc::ocp::direct::{solve_direct, to_mayer, transcribe, DirectConfig, Scheme};
use epioc::ocp::indirect::{sweep, SweepConfig};
use epioc::ocp::{trajectory_objective, OcProblem};
use epioc::presets;
use epioc::scenario::{normalize_scenario, ControlSpec};
use epioc::strategies::{simulate_schedule, ControlSchedule};

fn main() {
    for (label, scenario) in [
        ("epidemic", presets::vaccine_epidemic()),
        ("endemic", presets::vaccine_endemic()),
    ] {
        println!("==== {label} scenario ====");
        let oc = OcProblem::from_scenario(&scenario).unwrap();

        let config = SweepConfig {
            tol: 1e-5,
            max_iter: 800,
            relaxation: scenario.solver.relaxation.unwrap_or(0.5),
        };
        let indirect = sweep(&oc.problem, &oc.grid, &oc.initial, &config).unwrap();
        println!(
            "indirect (sweep):   J = {:.6e}  [{} iterations, converged = {}]",
            indirect.objective, indirect.iterations, indirect.converged
        );

        let mayer = to_mayer(&oc.problem);
        let nlp =
            transcribe(&mayer, &oc.grid, &oc.initial, Scheme::Euler, oc.grid.h()).unwrap();
        let dconfig = DirectConfig {
            tol: 1e-6,
            max_iter: 3000,
            control_intervals: scenario.solver.control_intervals,
            ..DirectConfig::default()
        };
        let direct = solve_direct(&nlp, &dconfig).unwrap();
        println!(
            "direct (10 blocks): J = {:.6e}  [{} iterations, converged = {}]",
            direct.objective, direct.iterations, direct.converged
        );

        let upper = match &scenario.control {
            ControlSpec::Optimize { upper, .. } => upper[0],
            _ => unreachable!(),
        };
        let fractional = normalize_scenario(&scenario).unwrap();
        for (policy, level) in [("no vaccination", 0.0), ("full capacity", upper)] {
            let (traj, metrics) =
                simulate_schedule(&fractional, &[ControlSchedule::constant(level)]).unwrap();
            let j = trajectory_objective(&oc.problem, &traj);
            println!(
                "{policy:<19} J = {j:.6e}  (peak infected fraction {:.4e})",
                metrics.peak_infected
            );
        }
        println!();
    }
}
