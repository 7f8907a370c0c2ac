//! Direct method on the seasonal mosquito/goodwill model: Euler and RK2
//! transcriptions at three step lengths (problem-size study), then a
//! projected-gradient solve of the 52-week program.
//!
//! Run with `cargo run --example direct_transcription`.

use epioc::ocp::direct::{solve_direct, to_mayer, transcribe, DirectConfig, Scheme};
use epioc::ocp::OcProblem;
use epioc::presets;

fn main() {
    let scenario = presets::dengue_goodwill();
    let oc = OcProblem::from_scenario(&scenario).unwrap();
    let mayer = to_mayer(&oc.problem);

    println!("{:<8} {:>6} {:>8} {:>13}", "scheme", "h", "vars", "constraints");
    for scheme in [Scheme::Euler, Scheme::Rk2] {
        for h in [0.5, 0.25, 0.125] {
            let nlp = transcribe(&mayer, &oc.grid, &oc.initial, scheme, h).unwrap();
            println!(
                "{:<8} {:>6} {:>8} {:>13}",
                format!("{scheme:?}"),
                h,
                nlp.n_vars,
                nlp.n_constraints
            );
        }
    }

    println!("\nsolving the Euler transcription at h = 0.25 weeks...");
    let nlp = transcribe(&mayer, &oc.grid, &oc.initial, Scheme::Euler, 0.25).unwrap();
    println!("layout: {}", nlp.layout_description());
    let config = DirectConfig {
        tol: 1e-6,
        max_iter: 3000,
        ..DirectConfig::default()
    };
    let solution = solve_direct(&nlp, &config).unwrap();
    println!(
        "converged = {} after {} projected-gradient iterations",
        solution.converged, solution.iterations
    );
    println!("transcribed cost  = {:.4e}", solution.solver_objective());
    println!("re-integrated cost = {:.4e}", solution.objective);

    let controls = solution.trajectory.controls.as_ref().unwrap();
    let spray_weeks = controls.iter().filter(|u| u[0] > 0.05).count() as f64 * 0.25;
    println!("weeks with insecticide investment above 0.05: {spray_weeks:.1}");
}
