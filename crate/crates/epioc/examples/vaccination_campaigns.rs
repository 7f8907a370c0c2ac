//! Vaccination what-if studies on the epidemic and endemic scenarios:
//! newborn coverage, mass campaigns, imperfect vaccines and waning
//! immunity, compared on the infected-humans peak.
//!
//! Run with `cargo run --example vaccination_campaigns`.

use epioc::presets;
use epioc::scenario::{
    ControlSpec, ModelId, ParameterSet, Scenario, StateVector, TimeGrid, TimeUnit,
};
use epioc::strategies::parameter_sweep;

fn svir_scenario(model: ModelId, epidemic: bool, extra: &[(&str, f64)]) -> Scenario {
    let source = if epidemic {
        presets::vaccine_epidemic()
    } else {
        presets::vaccine_endemic()
    };
    let mut params = ParameterSet::default();
    for name in model.required_params() {
        let value = source
            .params
            .try_get(name)
            .or_else(|| extra.iter().find(|(n, _)| n == name).map(|(_, v)| *v))
            .unwrap_or(0.0);
        params.set(name, value);
    }
    for (name, value) in extra {
        params.set(name, *value);
    }
    let initial = if epidemic {
        vec![479990.0, 0.0, 10.0, 0.0, 1_440_000.0, 1_440_000.0, 0.0]
    } else {
        vec![379990.0, 0.0, 10.0, 100_000.0, 1_440_000.0, 1_440_000.0, 0.0]
    };
    Scenario {
        model,
        normalized: false,
        time_unit: TimeUnit::Days,
        params,
        initial: StateVector(initial),
        grid: TimeGrid {
            t0: 0.0,
            tf: 365.0,
            n_steps: 1460,
        },
        control: ControlSpec::Constant { levels: vec![] },
        weights: Default::default(),
        solver: Default::default(),
        notes: vec![],
    }
}

fn print_sweep(title: &str, scenario: &Scenario, knob: &str, values: &[f64]) {
    println!("{title}");
    let rows = parameter_sweep(scenario, knob, values).unwrap();
    for (value, metrics) in rows {
        println!(
            "  {knob} = {value:<5}: peak infected = {:>9.1} at day {:>5.1}",
            metrics.peak_infected, metrics.peak_time
        );
    }
    println!();
}

fn main() {
    for epidemic in [true, false] {
        let label = if epidemic { "epidemic" } else { "endemic" };
        println!("==== {label} scenario ====");
        let pediatric = svir_scenario(ModelId::SvirPediatric, epidemic, &[("p", 0.0)]);
        print_sweep(
            "newborn coverage (cannot beat a fast outbreak):",
            &pediatric,
            "p",
            &[0.0, 0.25, 0.5, 0.75, 1.0],
        );
        let mass = svir_scenario(ModelId::SvirMass, epidemic, &[("psi", 0.0)]);
        print_sweep(
            "mass vaccination of susceptibles:",
            &mass,
            "psi",
            &[0.0, 0.05, 0.10, 0.25, 0.50],
        );
        let imperfect = svir_scenario(
            ModelId::SvirImperfect,
            epidemic,
            &[("psi", 0.85), ("sigma", 0.0)],
        );
        print_sweep(
            "imperfect vaccine at 85% coverage (sigma = residual infectivity):",
            &imperfect,
            "sigma",
            &[0.0, 0.10, 0.20, 0.50, 0.75],
        );
        let waning = svir_scenario(
            ModelId::SvirWaning,
            epidemic,
            &[("psi", 0.85), ("theta", 0.0)],
        );
        print_sweep(
            "waning immunity at 85% coverage:",
            &waning,
            "theta",
            &[0.0, 0.05, 0.10, 0.15, 0.20],
        );
    }
}
