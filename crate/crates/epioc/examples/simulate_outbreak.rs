//! Simulates the bundled classic outbreaks (trachoma SIS, boarding-school
//! influenza SIR) and prints peak/attack summaries.
//!
//! Run with `cargo run --example simulate_outbreak`.

use epioc::analysis::closed_form_r0;
use epioc::presets;
use epioc::strategies::{simulate_schedule, ControlSchedule};

fn main() {
    for scenario in [presets::trachoma(), presets::influenza()] {
        let schedules: Vec<ControlSchedule> = scenario
            .model
            .neutral_controls()
            .iter()
            .map(|l| ControlSchedule::constant(*l))
            .collect();
        let (trajectory, metrics) = simulate_schedule(&scenario, &schedules).unwrap();
        let r0 = closed_form_r0(scenario.model, &scenario.params, &[]).unwrap();

        println!("== {} over {} {:?} ==", scenario.model, scenario.grid.tf, scenario.time_unit);
        println!("   R0                  = {:.3}", r0.value);
        println!(
            "   peak infected       = {:.6} at t = {:.1}",
            metrics.peak_infected, metrics.peak_time
        );
        println!("   cumulative infected = {:.4}", metrics.cumulative_infected);
        let names = scenario.state_names();
        let last = trajectory.final_state();
        print!("   final state         =");
        for (name, v) in names.iter().zip(last) {
            print!(" {name}={v:.4}");
        }
        println!("\n");
    }
}
