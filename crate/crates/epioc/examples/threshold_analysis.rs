//! Threshold analysis of the Cape Verde SEIR+ASEI outbreak: reproduction
//! numbers by both routes, equilibria with stability, and the critical
//! adulticide level at which the disease-free state becomes attracting.
//!
//! Run with `cargo run --example threshold_analysis`.

use epioc::analysis::{
    classify_stability, closed_form_r0, critical_control, find_equilibria, next_generation_r0,
    offspring_quantity, EquilibriumKind,
};
use epioc::presets;

fn main() {
    let s = presets::cape_verde_seir_asei();
    let model = s.model;
    println!("== {model}, no adulticide ==");
    let controls = [0.0];

    let m = offspring_quantity(model, &s.params, &controls).unwrap();
    println!("mosquito offspring quantity M = {m:.4} (sustainable population: {})", m > 0.0);

    let closed = closed_form_r0(model, &s.params, &controls).unwrap();
    println!("R0 (closed form)       = {:.4}", closed.value);

    let equilibria = find_equilibria(model, &s.params, &controls).unwrap();
    let brdfe = equilibria
        .iter()
        .find(|e| e.kind == EquilibriumKind::Brdfe)
        .unwrap();
    let ng = next_generation_r0(model, &s.params, &controls, brdfe).unwrap();
    println!("R0 (next generation)   = {:.4}", ng.value);

    println!("\nequilibria:");
    for point in &equilibria {
        let classified = classify_stability(model, &s.params, &controls, point).unwrap();
        println!(
            "  {:<12} residual {:.1e}  {:<9} leading Re(eig) {:+.3e}",
            classified.kind.label(),
            classified.residual,
            classified.stability.unwrap().label(),
            classified.leading_eigenvalue_real_part.unwrap(),
        );
        let names = model.state_names(false);
        print!("    ");
        for (name, v) in names.iter().zip(&classified.state) {
            print!("{name}={v:.1} ");
        }
        println!();
    }

    let critical = critical_control(model, &s.params, &controls, "c", (0.0, 1.0)).unwrap();
    println!("\ncritical constant adulticide: c* = {critical:.6}");
    for c in [0.0, critical * 0.9, critical * 1.1, 0.157] {
        let r = closed_form_r0(model, &s.params, &[c]).unwrap();
        println!("  c = {c:.4} -> R0 = {:.4}", r.value);
    }
}
