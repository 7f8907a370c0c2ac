//! Bundled case-study scenarios. The same scenarios are shipped as JSON
//! files under `presets/` at the repository root; a test pins the files to
//! these builders so the two never drift.

use std::collections::BTreeMap;

use crate::scenario::{
    ControlSpec, ModelId, ParameterSet, Scenario, SolverConfig, SolverMethod, StateVector,
    TimeGrid, TimeUnit,
};

fn solver(method: SolverMethod, tol: f64, max_iter: usize) -> SolverConfig {
    SolverConfig {
        method,
        tol,
        max_iter,
        relaxation: None,
        control_intervals: None,
    }
}

fn weights(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Endemic trachoma, SIS dynamics.
pub fn trachoma() -> Scenario {
    Scenario {
        model: ModelId::Sis,
        normalized: false,
        time_unit: TimeUnit::Days,
        params: ParameterSet::from_pairs(&[("beta", 0.047), ("gamma", 0.017)]),
        initial: StateVector(vec![1.0 - 1e-6, 1e-6]),
        grid: TimeGrid {
            t0: 0.0,
            tf: 1000.0,
            n_steps: 1000,
        },
        control: ControlSpec::Constant { levels: vec![] },
        weights: BTreeMap::new(),
        solver: solver(SolverMethod::Rk45, 1e-8, 500),
        notes: vec![
            "Trachoma: recovery confers no immunity, so infection cycles through SIS.".into(),
        ],
    }
}

/// 1978 English boarding-school influenza outbreak (763 boys, 3 initially
/// infected), SIR without demography.
pub fn influenza() -> Scenario {
    Scenario {
        model: ModelId::SirNoDemo,
        normalized: false,
        time_unit: TimeUnit::Days,
        params: ParameterSet::from_pairs(&[("beta", 1.66), ("gamma", 1.0 / 2.2)]),
        initial: StateVector(vec![760.0 / 763.0, 3.0 / 763.0, 0.0]),
        grid: TimeGrid {
            t0: 0.0,
            tf: 15.0,
            n_steps: 150,
        },
        control: ControlSpec::Constant { levels: vec![] },
        weights: BTreeMap::new(),
        solver: solver(SolverMethod::Rk45, 1e-8, 500),
        notes: vec!["Fitted infectious period 2.2 days, transmission rate 1.66/day.".into()],
    }
}

/// Rubella in China over three years with bounded vaccination; the
/// canonical forward-backward sweep benchmark.
pub fn rubella() -> Scenario {
    Scenario {
        model: ModelId::Rubella,
        normalized: false,
        time_unit: TimeUnit::Years,
        params: ParameterSet::from_pairs(&[
            ("b", 0.012),
            ("beta", 527.59),
            ("e", 36.5),
            ("g", 30.417),
            ("p", 0.65),
            ("q", 0.65),
        ]),
        initial: StateVector(vec![0.0555, 0.0003, 0.0004, 1.0]),
        grid: TimeGrid {
            t0: 0.0,
            tf: 3.0,
            n_steps: 3000,
        },
        control: ControlSpec::Optimize {
            lower: vec![0.0],
            upper: vec![0.9],
        },
        weights: weights(&[("A", 100.0)]),
        solver: solver(SolverMethod::Sweep, 1e-4, 200),
        notes: vec!["Vaccination control bounded by 0.9; infection cost weight A = 100.".into()],
    }
}

/// Seasonal mosquito/goodwill model over 52 weeks with insecticide and
/// educational-campaign investments.
pub fn dengue_goodwill() -> Scenario {
    Scenario {
        model: ModelId::DengueGoodwill,
        normalized: false,
        time_unit: TimeUnit::Weeks,
        params: ParameterSet::from_pairs(&[
            ("P", 1.0),
            ("alpha_M", 0.18),
            ("alpha_R", 0.20),
            ("beta", 0.3),
            ("eta", 0.15),
            ("mu", 0.1),
            ("omega", 2.0 * std::f64::consts::PI / 52.0),
            ("phi", 0.0),
            ("rho", 0.1),
            ("tau", 0.1),
            ("theta", 0.05),
        ]),
        initial: StateVector(vec![1.0, 0.12, 0.004, 0.05]),
        grid: TimeGrid {
            t0: 0.0,
            tf: 52.0,
            n_steps: 208,
        },
        control: ControlSpec::Optimize {
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 1.0],
        },
        weights: weights(&[("gamma_D", 1.0), ("gamma_E", 0.8), ("gamma_S", 0.4)]),
        solver: solver(SolverMethod::Direct, 1e-6, 3000),
        notes: vec![
            "Normalized population (P = 1); seasonal oscillation has a 52-week period.".into(),
        ],
    }
}

fn cape_verde_asei_params() -> ParameterSet {
    ParameterSet::from_pairs(&[
        ("B", 1.0),
        ("N_h", 480000.0),
        ("beta_hm", 0.375),
        ("beta_mh", 0.375),
        ("eta_A", 0.08),
        ("eta_h", 1.0 / 3.0),
        ("eta_m", 1.0 / 11.0),
        ("k", 3.0),
        ("m", 6.0),
        ("mu_A", 0.25),
        ("mu_h", 1.0 / (71.0 * 365.0)),
        ("mu_m", 1.0 / 11.0),
        ("nu_h", 0.25),
        ("varphi", 6.0),
    ])
}

fn cape_verde_notes() -> Vec<String> {
    vec![
        "2009 Cape Verde dengue outbreak; human data from Cape Verde, mosquito data from Brazilian Aedes aegypti studies.".into(),
        "Assumption: exposed mosquitoes start at zero (E_m was not observed).".into(),
    ]
}

/// Cape Verde SEIR+ASEI scenario in fractional form, ready for the
/// adulticide optimal-control studies (12-week horizon).
pub fn cape_verde_seir_asei() -> Scenario {
    Scenario {
        model: ModelId::SeirAsei,
        normalized: true,
        time_unit: TimeUnit::Days,
        params: cape_verde_asei_params(),
        initial: StateVector(vec![0.99865, 0.00035, 0.001, 0.0, 1.0, 1.0, 0.0, 0.0]),
        grid: TimeGrid {
            t0: 0.0,
            tf: 84.0,
            n_steps: 840,
        },
        control: ControlSpec::Optimize {
            lower: vec![0.0],
            upper: vec![1.0],
        },
        weights: weights(&[("gamma_D", 0.5), ("gamma_S", 0.5)]),
        solver: SolverConfig {
            method: SolverMethod::Sweep,
            tol: 1e-4,
            max_iter: 300,
            relaxation: None,
            control_intervals: Some(10),
        },
        notes: cape_verde_notes(),
    }
}

/// Same outbreak in absolute counts (S_h0 = 480000 - 216 - 434).
pub fn cape_verde_seir_asei_absolute() -> Scenario {
    let mut s = cape_verde_seir_asei();
    s.normalized = false;
    s.initial = StateVector(vec![
        479350.0, 216.0, 434.0, 0.0, 1_440_000.0, 2_880_000.0, 0.0, 0.0,
    ]);
    s
}

fn cape_verde_asi_params(b: f64, beta: f64) -> ParameterSet {
    ParameterSet::from_pairs(&[
        ("B", b),
        ("N_h", 480000.0),
        ("beta_hm", beta),
        ("beta_mh", beta),
        ("eta_A", 0.08),
        ("eta_h", 1.0 / 3.0),
        ("k", 3.0),
        ("m", 3.0),
        ("mu_A", 0.25),
        ("mu_h", 1.0 / (71.0 * 365.0)),
        ("mu_m", 0.1),
        ("varphi", 6.0),
    ])
}

/// Cape Verde SIR+ASI scenario with larvicide, adulticide and mechanical
/// control over one year, in fractional form.
pub fn cape_verde_sir_asi() -> Scenario {
    Scenario {
        model: ModelId::SirAsi,
        normalized: true,
        time_unit: TimeUnit::Days,
        params: cape_verde_asi_params(0.8, 0.375),
        initial: StateVector(vec![0.9999, 0.0001, 0.0, 1.0, 1.0, 0.0]),
        grid: TimeGrid {
            t0: 0.0,
            tf: 365.0,
            n_steps: 1460,
        },
        control: ControlSpec::Optimize {
            lower: vec![0.0, 0.0, 0.01],
            upper: vec![1.0, 1.0, 1.0],
        },
        weights: weights(&[
            ("gamma_D", 0.25),
            ("gamma_E", 0.25),
            ("gamma_L", 0.25),
            ("gamma_S", 0.25),
        ]),
        solver: SolverConfig {
            method: SolverMethod::Direct,
            tol: 1e-6,
            max_iter: 3000,
            relaxation: None,
            control_intervals: Some(10),
        },
        notes: cape_verde_notes(),
    }
}

/// Same scenario in absolute counts.
pub fn cape_verde_sir_asi_absolute() -> Scenario {
    let mut s = cape_verde_sir_asi();
    s.normalized = false;
    s.initial = StateVector(vec![
        479990.0, 10.0, 0.0, 1_440_000.0, 1_440_000.0, 0.0,
    ]);
    s
}

fn vaccine_scenario(
    b: f64,
    beta: f64,
    initial: Vec<f64>,
    u_max: f64,
    note: &str,
) -> Scenario {
    let mut params = cape_verde_asi_params(b, beta);
    params.set("theta", 0.05);
    Scenario {
        model: ModelId::SirAsiVaccineControl,
        normalized: true,
        time_unit: TimeUnit::Days,
        params,
        initial: StateVector(initial),
        grid: TimeGrid {
            t0: 0.0,
            tf: 365.0,
            n_steps: 1460,
        },
        control: ControlSpec::Optimize {
            lower: vec![0.0],
            upper: vec![u_max],
        },
        weights: weights(&[("gamma_D", 1.0), ("gamma_V", 0.5)]),
        solver: SolverConfig {
            method: SolverMethod::Sweep,
            tol: 1e-4,
            max_iter: 500,
            relaxation: Some(0.3),
            control_intervals: Some(10),
        },
        notes: vec![
            note.to_string(),
            "Vaccination acts on susceptibles with waning immunity (theta = 0.05).".into(),
        ],
    }
}

/// Epidemic vaccination scenario: naive population, 10 initially infected.
pub fn vaccine_epidemic() -> Scenario {
    vaccine_scenario(
        0.8,
        0.375,
        vec![479990.0 / 480000.0, 10.0 / 480000.0, 0.0, 1.0, 1.0, 0.0],
        0.9,
        "Epidemic scenario: fully susceptible population, vaccination capacity 0.9.",
    )
}

/// Endemic vaccination scenario: 100000 already immune, lower transmission.
pub fn vaccine_endemic() -> Scenario {
    vaccine_scenario(
        0.75,
        0.21,
        vec![
            379990.0 / 480000.0,
            10.0 / 480000.0,
            100000.0 / 480000.0,
            1.0,
            1.0,
            0.0,
        ],
        0.8,
        "Endemic scenario: herd immunity at about 21 percent, vaccination capacity 0.8.",
    )
}

/// The preset names shipped as files under `presets/`.
pub fn list() -> Vec<(&'static str, Scenario)> {
    vec![
        ("trachoma", trachoma()),
        ("influenza", influenza()),
        ("rubella", rubella()),
        ("dengue-goodwill", dengue_goodwill()),
        ("capeverde-seirasei", cape_verde_seir_asei()),
        ("capeverde-sirasi", cape_verde_sir_asi()),
        ("vaccine-epidemic", vaccine_epidemic()),
        ("vaccine-endemic", vaccine_endemic()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{load_scenario, serialize};

    #[test]
    fn all_presets_validate() {
        for (name, s) in list() {
            s.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn preset_files_match_builders() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("..")
            .join("..")
            .join("presets");
        for (name, s) in list() {
            let path = dir.join(format!("{name}.json"));
            let text = std::fs::read_to_string(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(text, serialize(&s), "{name}.json differs from builder");
            assert_eq!(load_scenario(&text).unwrap(), s, "{name}.json round trip");
        }
    }
}
