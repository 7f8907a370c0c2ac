//! Scenario configuration: model identifiers, parameter sets, time grids,
//! control specifications and the JSON document format.
//!
//! A [`Scenario`] is a complete runnable configuration. Scenarios are loaded
//! from JSON with [`load_scenario`], written back in canonical form with
//! [`serialize`], and host-vector scenarios can be rescaled to fractional
//! compartments with [`normalize_scenario`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors produced while loading or validating a scenario document.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
    #[error("{0}")]
    Unsupported(String),
}

impl ScenarioError {
    pub fn invalid(field: &str, message: impl Into<String>) -> Self {
        ScenarioError::Validation {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

/// Time unit carried as scenario metadata. Units are never converted
/// implicitly; grids, rates and costs are all expressed in this unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    #[default]
    Days,
    Weeks,
    Years,
}

/// Identifies one model of the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    Sis,
    SirNoDemo,
    SirDemo,
    Seir,
    Mseir,
    Seit,
    DengueGoodwill,
    SeirAsei,
    SirAsi,
    SvirPediatric,
    SvirMass,
    SvirImperfect,
    SvirWaning,
    SirAsiVaccineControl,
    Rubella,
}

pub const ALL_MODELS: [ModelId; 15] = [
    ModelId::Sis,
    ModelId::SirNoDemo,
    ModelId::SirDemo,
    ModelId::Seir,
    ModelId::Mseir,
    ModelId::Seit,
    ModelId::DengueGoodwill,
    ModelId::SeirAsei,
    ModelId::SirAsi,
    ModelId::SvirPediatric,
    ModelId::SvirMass,
    ModelId::SvirImperfect,
    ModelId::SvirWaning,
    ModelId::SirAsiVaccineControl,
    ModelId::Rubella,
];

impl ModelId {
    pub fn name(&self) -> &'static str {
        match self {
            ModelId::Sis => "SIS",
            ModelId::SirNoDemo => "SIR_NODEMO",
            ModelId::SirDemo => "SIR_DEMO",
            ModelId::Seir => "SEIR",
            ModelId::Mseir => "MSEIR",
            ModelId::Seit => "SEIT",
            ModelId::DengueGoodwill => "DENGUE_GOODWILL",
            ModelId::SeirAsei => "SEIR_ASEI",
            ModelId::SirAsi => "SIR_ASI",
            ModelId::SvirPediatric => "SVIR_PEDIATRIC",
            ModelId::SvirMass => "SVIR_MASS",
            ModelId::SvirImperfect => "SVIR_IMPERFECT",
            ModelId::SvirWaning => "SVIR_WANING",
            ModelId::SirAsiVaccineControl => "SIR_ASI_VACCINE_CONTROL",
            ModelId::Rubella => "RUBELLA",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ScenarioError> {
        ALL_MODELS
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| ScenarioError::invalid("model", format!("unknown model `{s}`")))
    }

    pub fn state_dim(&self) -> usize {
        self.state_names(false).len()
    }

    pub fn control_dim(&self) -> usize {
        self.control_names().len()
    }

    /// Component names, in state-vector order. Host-vector models use
    /// lowercase names for the fractional (normalized) form.
    pub fn state_names(&self, normalized: bool) -> &'static [&'static str] {
        match (self, normalized) {
            (ModelId::Sis, _) => &["S", "I"],
            (ModelId::SirNoDemo, _) | (ModelId::SirDemo, _) => &["S", "I", "R"],
            (ModelId::Seir, _) => &["S", "E", "I", "R"],
            (ModelId::Mseir, _) => &["M", "S", "E", "I", "R"],
            (ModelId::Seit, _) => &["S", "E", "I", "T"],
            (ModelId::DengueGoodwill, _) => &["x1", "x2", "x3", "x4"],
            (ModelId::SeirAsei, false) => {
                &["S_h", "E_h", "I_h", "R_h", "A_m", "S_m", "E_m", "I_m"]
            }
            (ModelId::SeirAsei, true) => &["s_h", "e_h", "i_h", "r_h", "a_m", "s_m", "e_m", "i_m"],
            (ModelId::SirAsi, false) => &["S_h", "I_h", "R_h", "A_m", "S_m", "I_m"],
            (ModelId::SirAsi, true) => &["s_h", "i_h", "r_h", "a_m", "s_m", "i_m"],
            (ModelId::SvirPediatric, false)
            | (ModelId::SvirMass, false)
            | (ModelId::SvirImperfect, false)
            | (ModelId::SvirWaning, false) => &["S_h", "V_h", "I_h", "R_h", "A_m", "S_m", "I_m"],
            (ModelId::SvirPediatric, true)
            | (ModelId::SvirMass, true)
            | (ModelId::SvirImperfect, true)
            | (ModelId::SvirWaning, true) => &["s_h", "v_h", "i_h", "r_h", "a_m", "s_m", "i_m"],
            (ModelId::SirAsiVaccineControl, false) => &["S_h", "I_h", "R_h", "A_m", "S_m", "I_m"],
            (ModelId::SirAsiVaccineControl, true) => &["s_h", "i_h", "r_h", "a_m", "s_m", "i_m"],
            (ModelId::Rubella, _) => &["x1", "x2", "x3", "x4"],
        }
    }

    pub fn control_names(&self) -> &'static [&'static str] {
        match self {
            ModelId::Sis
            | ModelId::SirNoDemo
            | ModelId::SirDemo
            | ModelId::Seir
            | ModelId::Mseir
            | ModelId::Seit
            | ModelId::SvirPediatric
            | ModelId::SvirMass
            | ModelId::SvirImperfect
            | ModelId::SvirWaning => &[],
            ModelId::DengueGoodwill => &["u1", "u2"],
            ModelId::SeirAsei => &["c"],
            ModelId::SirAsi => &["c_A", "c_m", "alpha"],
            ModelId::SirAsiVaccineControl | ModelId::Rubella => &["u"],
        }
    }

    /// Control levels that leave the uncontrolled dynamics unchanged
    /// (sprays off, full mechanical coverage `alpha = 1`).
    pub fn neutral_controls(&self) -> Vec<f64> {
        self.control_names()
            .iter()
            .map(|n| if *n == "alpha" { 1.0 } else { 0.0 })
            .collect()
    }

    /// Natural range of each control.
    pub fn control_ranges(&self) -> Vec<(f64, f64)> {
        self.control_names()
            .iter()
            .map(|n| match *n {
                // the aquatic capacity is divided by alpha, so 0 is excluded
                "alpha" => (1e-3, 1.0),
                _ => (0.0, 1.0),
            })
            .collect()
    }

    pub fn required_params(&self) -> &'static [&'static str] {
        match self {
            ModelId::Sis | ModelId::SirNoDemo => &["beta", "gamma"],
            ModelId::SirDemo => &["beta", "gamma", "mu"],
            ModelId::Seir => &["beta", "gamma", "mu", "nu"],
            ModelId::Mseir => &["beta", "delta", "gamma", "mu", "nu"],
            ModelId::Seit => &["beta1", "beta2", "mu", "nu", "q", "r1", "r2"],
            ModelId::DengueGoodwill => &[
                "P", "alpha_M", "alpha_R", "beta", "eta", "mu", "omega", "phi", "rho", "tau",
                "theta",
            ],
            ModelId::SeirAsei => &[
                "B", "N_h", "beta_hm", "beta_mh", "eta_A", "eta_h", "eta_m", "k", "m", "mu_A",
                "mu_h", "mu_m", "nu_h", "varphi",
            ],
            ModelId::SirAsi => &[
                "B", "N_h", "beta_hm", "beta_mh", "eta_A", "eta_h", "k", "m", "mu_A", "mu_h",
                "mu_m", "varphi",
            ],
            ModelId::SvirPediatric => &[
                "B", "N_h", "beta_hm", "beta_mh", "eta_A", "eta_h", "k", "m", "mu_A", "mu_h",
                "mu_m", "p", "varphi",
            ],
            ModelId::SvirMass => &[
                "B", "N_h", "beta_hm", "beta_mh", "eta_A", "eta_h", "k", "m", "mu_A", "mu_h",
                "mu_m", "psi", "varphi",
            ],
            ModelId::SvirImperfect => &[
                "B", "N_h", "beta_hm", "beta_mh", "eta_A", "eta_h", "k", "m", "mu_A", "mu_h",
                "mu_m", "psi", "sigma", "varphi",
            ],
            ModelId::SvirWaning => &[
                "B", "N_h", "beta_hm", "beta_mh", "eta_A", "eta_h", "k", "m", "mu_A", "mu_h",
                "mu_m", "psi", "theta", "varphi",
            ],
            ModelId::SirAsiVaccineControl => &[
                "B", "N_h", "beta_hm", "beta_mh", "eta_A", "eta_h", "k", "m", "mu_A", "mu_h",
                "mu_m", "theta", "varphi",
            ],
            ModelId::Rubella => &["b", "beta", "e", "g", "p", "q"],
        }
    }

    /// Cost-weight names used by the model's objective (empty for models
    /// without an optimal-control layer).
    pub fn required_weights(&self) -> &'static [&'static str] {
        match self {
            ModelId::DengueGoodwill => &["gamma_D", "gamma_E", "gamma_S"],
            ModelId::SeirAsei => &["gamma_D", "gamma_S"],
            ModelId::SirAsi => &["gamma_D", "gamma_E", "gamma_L", "gamma_S"],
            ModelId::SirAsiVaccineControl => &["gamma_D", "gamma_V"],
            ModelId::Rubella => &["A"],
            _ => &[],
        }
    }

    /// Models with an adjoint system and a pointwise control law.
    pub fn is_oc_enabled(&self) -> bool {
        matches!(
            self,
            ModelId::DengueGoodwill
                | ModelId::SeirAsei
                | ModelId::SirAsi
                | ModelId::SirAsiVaccineControl
                | ModelId::Rubella
        )
    }

    /// Host-vector models with a defined fractional rescaling.
    pub fn is_host_vector(&self) -> bool {
        matches!(
            self,
            ModelId::SeirAsei
                | ModelId::SirAsi
                | ModelId::SvirPediatric
                | ModelId::SvirMass
                | ModelId::SvirImperfect
                | ModelId::SvirWaning
                | ModelId::SirAsiVaccineControl
        )
    }

    /// Per-component scale factors that map absolute counts to fractions:
    /// humans by `N_h`, the aquatic phase by `k N_h`, adult mosquitoes by
    /// `m N_h`. Only defined for host-vector models.
    pub fn state_scales(&self, p: &ParameterSet) -> Option<Vec<f64>> {
        if !self.is_host_vector() {
            return None;
        }
        let nh = p.get("N_h");
        let ka = p.get("k") * nh;
        let ma = p.get("m") * nh;
        let scales = match self {
            ModelId::SeirAsei => vec![nh, nh, nh, nh, ka, ma, ma, ma],
            ModelId::SirAsi | ModelId::SirAsiVaccineControl => vec![nh, nh, nh, ka, ma, ma],
            _ => vec![nh, nh, nh, nh, ka, ma, ma], // SVIR family
        };
        Some(scales)
    }

    /// Index of the infected-human compartment.
    pub fn infected_human_index(&self) -> usize {
        match self {
            ModelId::Sis | ModelId::SirNoDemo | ModelId::SirDemo => 1,
            ModelId::Seir | ModelId::Seit => 2,
            ModelId::Mseir => 3,
            ModelId::DengueGoodwill | ModelId::Rubella => 2,
            ModelId::SeirAsei => 2,
            ModelId::SirAsi | ModelId::SirAsiVaccineControl => 1,
            ModelId::SvirPediatric
            | ModelId::SvirMass
            | ModelId::SvirImperfect
            | ModelId::SvirWaning => 2,
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ParamKind {
    Rate,
    Probability,
    Population,
    Ratio,
    Amplitude,
    Phase,
    AngularFrequency,
}

fn param_kind(model: ModelId, name: &str) -> ParamKind {
    if model == ModelId::DengueGoodwill {
        // `mu` is the seasonal oscillation amplitude here, not a death rate
        match name {
            "mu" => return ParamKind::Amplitude,
            "phi" => return ParamKind::Phase,
            "omega" => return ParamKind::AngularFrequency,
            "P" => return ParamKind::Population,
            _ => {}
        }
    }
    match name {
        "beta_mh" | "beta_hm" | "p" | "q" | "sigma" | "psi" => ParamKind::Probability,
        "N_h" | "P" => ParamKind::Population,
        "m" | "k" => ParamKind::Ratio,
        _ => ParamKind::Rate,
    }
}

/// Named, validated model parameters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParameterSet {
    entries: BTreeMap<String, f64>,
}

impl ParameterSet {
    pub fn new(entries: BTreeMap<String, f64>) -> Self {
        ParameterSet { entries }
    }

    pub fn from_pairs(pairs: &[(&str, f64)]) -> Self {
        ParameterSet {
            entries: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    /// Panics if the name is absent; parameter sets are validated against
    /// their model before use.
    pub fn get(&self, name: &str) -> f64 {
        *self
            .entries
            .get(name)
            .unwrap_or_else(|| panic!("parameter `{name}` missing from validated set"))
    }

    pub fn try_get(&self, name: &str) -> Option<f64> {
        self.entries.get(name).copied()
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.entries.insert(name.to_string(), value);
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn entries(&self) -> &BTreeMap<String, f64> {
        &self.entries
    }

    /// Checks that exactly the model's required names are present and that
    /// every value is inside its admissible range.
    pub fn validate_for(&self, model: ModelId) -> Result<(), ScenarioError> {
        for name in model.required_params() {
            if !self.entries.contains_key(*name) {
                return Err(ScenarioError::invalid(
                    &format!("params.{name}"),
                    "required parameter is missing",
                ));
            }
        }
        for name in self.entries.keys() {
            if !model.required_params().contains(&name.as_str()) {
                return Err(ScenarioError::invalid(
                    &format!("params.{name}"),
                    format!("unknown parameter for model {model}"),
                ));
            }
        }
        for (name, value) in &self.entries {
            let field = format!("params.{name}");
            if !value.is_finite() {
                return Err(ScenarioError::invalid(&field, "value must be finite"));
            }
            let v = *value;
            match param_kind(model, name) {
                ParamKind::Rate => {
                    if v < 0.0 {
                        return Err(ScenarioError::invalid(&field, "rate must be >= 0"));
                    }
                }
                ParamKind::Probability | ParamKind::Amplitude => {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(ScenarioError::invalid(&field, "value must be in [0, 1]"));
                    }
                }
                ParamKind::Population | ParamKind::Ratio | ParamKind::AngularFrequency => {
                    if v <= 0.0 {
                        return Err(ScenarioError::invalid(&field, "value must be > 0"));
                    }
                }
                ParamKind::Phase => {}
            }
        }
        Ok(())
    }
}

/// Ordered state components; all nonnegative for biological feasibility.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn validate(&self, field: &str) -> Result<(), ScenarioError> {
        for (i, v) in self.0.iter().enumerate() {
            if !v.is_finite() {
                return Err(ScenarioError::invalid(
                    &format!("{field}[{i}]"),
                    "component must be finite",
                ));
            }
            if *v < 0.0 {
                return Err(ScenarioError::invalid(
                    &format!("{field}[{i}]"),
                    "component must be >= 0",
                ));
            }
        }
        Ok(())
    }
}

impl std::ops::Deref for StateVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Uniform time grid with `n_steps + 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t0: f64,
    pub tf: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, tf: f64, n_steps: usize) -> Result<Self, ScenarioError> {
        let grid = TimeGrid { t0, tf, n_steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !self.t0.is_finite() || !self.tf.is_finite() {
            return Err(ScenarioError::invalid("grid", "t0 and tf must be finite"));
        }
        if self.tf <= self.t0 {
            return Err(ScenarioError::invalid("grid.tf", "tf must be > t0"));
        }
        if self.n_steps < 1 {
            return Err(ScenarioError::invalid("grid.n_steps", "must be >= 1"));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        (self.tf - self.t0) / self.n_steps as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.h();
        let mut t: Vec<f64> = (0..=self.n_steps).map(|i| self.t0 + i as f64 * h).collect();
        *t.last_mut().unwrap() = self.tf;
        t
    }
}

/// One pulse schedule: `level` for the first `duty` fraction of each
/// period, the neutral level otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub period: f64,
    pub duty: f64,
    pub level: f64,
}

/// How controls are supplied for a run.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlSpec {
    Constant { levels: Vec<f64> },
    Pulse { schedules: Vec<PulseSpec> },
    Optimize { lower: Vec<f64>, upper: Vec<f64> },
}

impl ControlSpec {
    pub fn mode(&self) -> &'static str {
        match self {
            ControlSpec::Constant { .. } => "constant",
            ControlSpec::Pulse { .. } => "pulse",
            ControlSpec::Optimize { .. } => "optimize",
        }
    }

    /// Constant levels used when the scenario is simulated as-is: the given
    /// levels in constant mode, the model's neutral levels otherwise.
    pub fn constant_levels(&self, model: ModelId) -> Vec<f64> {
        match self {
            ControlSpec::Constant { levels } => levels.clone(),
            _ => model.neutral_controls(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    Euler,
    Rk2,
    Rk4,
    Rk45,
    Sweep,
    Direct,
}

impl SolverMethod {
    pub fn parse(s: &str) -> Result<Self, ScenarioError> {
        match s {
            "euler" => Ok(SolverMethod::Euler),
            "rk2" => Ok(SolverMethod::Rk2),
            "rk4" => Ok(SolverMethod::Rk4),
            "rk45" => Ok(SolverMethod::Rk45),
            "sweep" => Ok(SolverMethod::Sweep),
            "direct" => Ok(SolverMethod::Direct),
            _ => Err(ScenarioError::invalid(
                "solver.method",
                format!("unknown method `{s}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub method: SolverMethod,
    pub tol: f64,
    pub max_iter: usize,
    /// Sweep control-update damping; defaults to 0.5.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relaxation: Option<f64>,
    /// Piecewise-constant control intervals for the direct solver
    /// (per-node controls when absent).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_intervals: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: SolverMethod::Rk45,
            tol: 1e-8,
            max_iter: 500,
            relaxation: None,
            control_intervals: None,
        }
    }
}

/// A complete runnable configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: ModelId,
    pub normalized: bool,
    pub time_unit: TimeUnit,
    pub params: ParameterSet,
    pub initial: StateVector,
    pub grid: TimeGrid,
    pub control: ControlSpec,
    pub weights: BTreeMap<String, f64>,
    pub solver: SolverConfig,
    pub notes: Vec<String>,
}

impl Scenario {
    pub fn state_names(&self) -> &'static [&'static str] {
        self.model.state_names(self.normalized)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let model = self.model;
        if self.normalized && !model.is_host_vector() {
            return Err(ScenarioError::invalid(
                "normalized",
                format!("model {model} has no normalized form"),
            ));
        }
        self.params.validate_for(model)?;
        self.grid.validate()?;
        if self.initial.len() != model.state_dim() {
            return Err(ScenarioError::invalid(
                "initial",
                format!(
                    "expected {} components for {model}, got {}",
                    model.state_dim(),
                    self.initial.len()
                ),
            ));
        }
        self.initial.validate("initial")?;

        let cdim = model.control_dim();
        let ranges = model.control_ranges();
        match &self.control {
            ControlSpec::Constant { levels } => {
                if levels.len() != cdim {
                    return Err(ScenarioError::invalid(
                        "control.levels",
                        format!("expected {cdim} levels, got {}", levels.len()),
                    ));
                }
                for (i, level) in levels.iter().enumerate() {
                    let (lo, hi) = ranges[i];
                    if !level.is_finite() || *level < lo || *level > hi {
                        return Err(ScenarioError::invalid(
                            &format!("control.levels[{i}]"),
                            format!("level must be in [{lo}, {hi}]"),
                        ));
                    }
                }
            }
            ControlSpec::Pulse { schedules } => {
                if schedules.len() != cdim {
                    return Err(ScenarioError::invalid(
                        "control",
                        format!("expected {cdim} pulse schedules, got {}", schedules.len()),
                    ));
                }
                for (i, p) in schedules.iter().enumerate() {
                    if !p.period.is_finite() || p.period <= 0.0 {
                        return Err(ScenarioError::invalid(
                            &format!("control.period[{i}]"),
                            "period must be > 0",
                        ));
                    }
                    if !(p.duty > 0.0 && p.duty <= 1.0) {
                        return Err(ScenarioError::invalid(
                            &format!("control.duty[{i}]"),
                            "duty must be in (0, 1]",
                        ));
                    }
                    let (lo, hi) = ranges[i];
                    if !p.level.is_finite() || p.level < lo || p.level > hi {
                        return Err(ScenarioError::invalid(
                            &format!("control.level[{i}]"),
                            format!("level must be in [{lo}, {hi}]"),
                        ));
                    }
                }
            }
            ControlSpec::Optimize { lower, upper } => {
                if lower.len() != cdim || upper.len() != cdim {
                    return Err(ScenarioError::invalid(
                        "control",
                        format!("expected {cdim} lower and upper bounds"),
                    ));
                }
                for i in 0..cdim {
                    if !lower[i].is_finite() || !upper[i].is_finite() || lower[i] > upper[i] {
                        return Err(ScenarioError::invalid(
                            &format!("control.lower[{i}]"),
                            "bounds must be finite with lower <= upper",
                        ));
                    }
                }
                for name in model.required_weights() {
                    if !self.weights.contains_key(*name) {
                        return Err(ScenarioError::invalid(
                            &format!("weights.{name}"),
                            "required cost weight is missing in optimize mode",
                        ));
                    }
                }
            }
        }

        for (name, value) in &self.weights {
            if !model.required_weights().contains(&name.as_str()) {
                return Err(ScenarioError::invalid(
                    &format!("weights.{name}"),
                    format!("unknown cost weight for model {model}"),
                ));
            }
            if !value.is_finite() || *value < 0.0 {
                return Err(ScenarioError::invalid(
                    &format!("weights.{name}"),
                    "weight must be >= 0",
                ));
            }
        }

        if !self.solver.tol.is_finite() || self.solver.tol <= 0.0 {
            return Err(ScenarioError::invalid("solver.tol", "must be > 0"));
        }
        if self.solver.max_iter == 0 {
            return Err(ScenarioError::invalid("solver.max_iter", "must be >= 1"));
        }
        if let Some(w) = self.solver.relaxation {
            if !(w > 0.0 && w <= 1.0) {
                return Err(ScenarioError::invalid(
                    "solver.relaxation",
                    "must be in (0, 1]",
                ));
            }
        }
        if let Some(r) = self.solver.control_intervals {
            if r == 0 || r > self.grid.n_steps {
                return Err(ScenarioError::invalid(
                    "solver.control_intervals",
                    "must be in [1, n_steps]",
                ));
            }
        }
        Ok(())
    }

    /// Stable digest of the canonical serialization (FNV-1a).
    pub fn digest(&self) -> String {
        let text = serialize(self);
        let mut hash: u64 = 0xcbf29ce484222325;
        for b in text.as_bytes() {
            hash ^= *b as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
        format!("{hash:016x}")
    }
}

// ---------------------------------------------------------------------------
// JSON document format

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControl {
    mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    period: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    duty: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lower: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    upper: Option<Vec<f64>>,
}

/// Field order is the canonical (lexicographic) key order.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    control: RawControl,
    grid: TimeGrid,
    initial: BTreeMap<String, f64>,
    model: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    normalized: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
    params: BTreeMap<String, f64>,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default, skip_serializing_if = "is_default_time_unit")]
    time_unit: TimeUnit,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    weights: BTreeMap<String, f64>,
}

fn is_default_time_unit(u: &TimeUnit) -> bool {
    *u == TimeUnit::Days
}

fn reject_field(
    mode: &str,
    name: &str,
    value: &Option<Vec<f64>>,
) -> Result<(), ScenarioError> {
    if value.is_some() {
        return Err(ScenarioError::invalid(
            &format!("control.{name}"),
            format!("field not allowed in `{mode}` mode"),
        ));
    }
    Ok(())
}

fn control_from_raw(raw: RawControl) -> Result<ControlSpec, ScenarioError> {
    match raw.mode.as_str() {
        "constant" => {
            reject_field("constant", "period", &raw.period)?;
            reject_field("constant", "duty", &raw.duty)?;
            reject_field("constant", "level", &raw.level)?;
            reject_field("constant", "lower", &raw.lower)?;
            reject_field("constant", "upper", &raw.upper)?;
            Ok(ControlSpec::Constant {
                levels: raw.levels.unwrap_or_default(),
            })
        }
        "pulse" => {
            reject_field("pulse", "levels", &raw.levels)?;
            reject_field("pulse", "lower", &raw.lower)?;
            reject_field("pulse", "upper", &raw.upper)?;
            let period = raw
                .period
                .ok_or_else(|| ScenarioError::invalid("control.period", "missing"))?;
            let duty = raw
                .duty
                .ok_or_else(|| ScenarioError::invalid("control.duty", "missing"))?;
            let level = raw
                .level
                .ok_or_else(|| ScenarioError::invalid("control.level", "missing"))?;
            if duty.len() != period.len() || level.len() != period.len() {
                return Err(ScenarioError::invalid(
                    "control",
                    "period, duty and level must have equal lengths",
                ));
            }
            let schedules = period
                .into_iter()
                .zip(duty)
                .zip(level)
                .map(|((period, duty), level)| PulseSpec {
                    period,
                    duty,
                    level,
                })
                .collect();
            Ok(ControlSpec::Pulse { schedules })
        }
        "optimize" => {
            reject_field("optimize", "levels", &raw.levels)?;
            reject_field("optimize", "period", &raw.period)?;
            reject_field("optimize", "duty", &raw.duty)?;
            reject_field("optimize", "level", &raw.level)?;
            let lower = raw
                .lower
                .ok_or_else(|| ScenarioError::invalid("control.lower", "missing"))?;
            let upper = raw
                .upper
                .ok_or_else(|| ScenarioError::invalid("control.upper", "missing"))?;
            Ok(ControlSpec::Optimize { lower, upper })
        }
        other => Err(ScenarioError::invalid(
            "control.mode",
            format!("unknown mode `{other}`"),
        )),
    }
}

fn control_to_raw(spec: &ControlSpec) -> RawControl {
    let mut raw = RawControl {
        mode: spec.mode().to_string(),
        levels: None,
        period: None,
        duty: None,
        level: None,
        lower: None,
        upper: None,
    };
    match spec {
        ControlSpec::Constant { levels } => raw.levels = Some(levels.clone()),
        ControlSpec::Pulse { schedules } => {
            raw.period = Some(schedules.iter().map(|s| s.period).collect());
            raw.duty = Some(schedules.iter().map(|s| s.duty).collect());
            raw.level = Some(schedules.iter().map(|s| s.level).collect());
        }
        ControlSpec::Optimize { lower, upper } => {
            raw.lower = Some(lower.clone());
            raw.upper = Some(upper.clone());
        }
    }
    raw
}

/// Parses and validates a scenario document. Unknown keys are hard errors.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario =
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let model = ModelId::parse(&raw.model)?;

    let names = model.state_names(raw.normalized);
    for key in raw.initial.keys() {
        if !names.contains(&key.as_str()) {
            return Err(ScenarioError::invalid(
                &format!("initial.{key}"),
                format!("unknown compartment for model {model}"),
            ));
        }
    }
    let mut initial = Vec::with_capacity(names.len());
    for name in names {
        match raw.initial.get(*name) {
            Some(v) => initial.push(*v),
            None => {
                return Err(ScenarioError::invalid(
                    &format!("initial.{name}"),
                    "compartment is missing",
                ))
            }
        }
    }

    let scenario = Scenario {
        model,
        normalized: raw.normalized,
        time_unit: raw.time_unit,
        params: ParameterSet::new(raw.params),
        initial: StateVector(initial),
        grid: raw.grid,
        control: control_from_raw(raw.control)?,
        weights: raw.weights,
        solver: raw.solver,
        notes: raw.notes,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Canonical serialization: keys sorted lexicographically, two-space
/// indentation, trailing newline. `load_scenario(serialize(s)) == s`.
pub fn serialize(s: &Scenario) -> String {
    let names = s.state_names();
    let initial: BTreeMap<String, f64> = names
        .iter()
        .zip(s.initial.iter())
        .map(|(n, v)| (n.to_string(), *v))
        .collect();
    let raw = RawScenario {
        control: control_to_raw(&s.control),
        grid: s.grid,
        initial,
        model: s.model.name().to_string(),
        normalized: s.normalized,
        notes: s.notes.clone(),
        params: s.params.entries().clone(),
        solver: s.solver,
        time_unit: s.time_unit,
        weights: s.weights.clone(),
    };
    let mut text = serde_json::to_string_pretty(&raw).expect("scenario serialization");
    text.push('\n');
    text
}

/// Rescales a host-vector scenario to fractional compartments (humans by
/// `N_h`, aquatic phase by `k N_h`, adult mosquitoes by `m N_h`).
/// Idempotent; component order is preserved.
pub fn normalize_scenario(s: &Scenario) -> Result<Scenario, ScenarioError> {
    if !s.model.is_host_vector() {
        return Err(ScenarioError::Unsupported(format!(
            "model {} has no defined normalization",
            s.model
        )));
    }
    if s.normalized {
        return Ok(s.clone());
    }
    let scales = s.model.state_scales(&s.params).expect("host-vector scales");
    let initial = StateVector(
        s.initial
            .iter()
            .zip(&scales)
            .map(|(v, scale)| v / scale)
            .collect(),
    );
    let mut out = s.clone();
    out.initial = initial;
    out.normalized = true;
    Ok(out)
}
