//! The model catalog: right-hand sides, adjoint systems, Hamiltonians and
//! pointwise control laws for every catalog model.
//!
//! [`ModelDefinition`] binds a [`ModelId`] to one of its two forms
//! (absolute counts or the fractional rescaling for host-vector models)
//! and dispatches evaluation to the family implementations.

mod classic;
mod goodwill;
mod host_vector;
mod rubella;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::scenario::{ModelId, ParameterSet, Scenario};

pub use host_vector::SvirKind;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model {0} has no adjoint system or control law")]
    NotOcEnabled(ModelId),
    #[error("model {0} has no normalized form")]
    NoNormalizedForm(ModelId),
    #[error("model {0}: adjoint, Hamiltonian and control law are defined on the normalized form")]
    RequiresNormalizedForm(ModelId),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Cost weights with zero defaults; absent names cost nothing.
fn weight(w: &BTreeMap<String, f64>, name: &str) -> f64 {
    w.get(name).copied().unwrap_or(0.0)
}

/// One catalog model in a fixed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDefinition {
    id: ModelId,
    normalized: bool,
}

enum Kernel {
    Sis(classic::SisParams),
    Sir(classic::SirParams),
    Seir(classic::SeirParams),
    Mseir(classic::MseirParams),
    Seit(classic::SeitParams),
    Goodwill(goodwill::GoodwillParams),
    Asei(host_vector::AseiParams),
    Asi(host_vector::HostVectorParams),
    Svir(host_vector::SvirParams),
    Vaccine(host_vector::VaccineParams),
    Rubella(rubella::RubellaParams),
}

fn host_vector_params(p: &ParameterSet) -> host_vector::HostVectorParams {
    host_vector::HostVectorParams {
        nh: p.get("N_h"),
        b: p.get("B"),
        beta_mh: p.get("beta_mh"),
        beta_hm: p.get("beta_hm"),
        mu_h: p.get("mu_h"),
        eta_h: p.get("eta_h"),
        mu_m: p.get("mu_m"),
        varphi: p.get("varphi"),
        mu_a: p.get("mu_A"),
        eta_a: p.get("eta_A"),
        m: p.get("m"),
        k: p.get("k"),
    }
}

fn kernel(id: ModelId, p: &ParameterSet) -> Kernel {
    match id {
        ModelId::Sis => Kernel::Sis(classic::SisParams {
            beta: p.get("beta"),
            gamma: p.get("gamma"),
        }),
        ModelId::SirNoDemo => Kernel::Sir(classic::SirParams {
            beta: p.get("beta"),
            gamma: p.get("gamma"),
            mu: 0.0,
        }),
        ModelId::SirDemo => Kernel::Sir(classic::SirParams {
            beta: p.get("beta"),
            gamma: p.get("gamma"),
            mu: p.get("mu"),
        }),
        ModelId::Seir => Kernel::Seir(classic::SeirParams {
            beta: p.get("beta"),
            gamma: p.get("gamma"),
            mu: p.get("mu"),
            nu: p.get("nu"),
        }),
        ModelId::Mseir => Kernel::Mseir(classic::MseirParams {
            beta: p.get("beta"),
            gamma: p.get("gamma"),
            mu: p.get("mu"),
            nu: p.get("nu"),
            delta: p.get("delta"),
        }),
        ModelId::Seit => Kernel::Seit(classic::SeitParams {
            beta1: p.get("beta1"),
            beta2: p.get("beta2"),
            mu: p.get("mu"),
            nu: p.get("nu"),
            q: p.get("q"),
            r1: p.get("r1"),
            r2: p.get("r2"),
        }),
        ModelId::DengueGoodwill => Kernel::Goodwill(goodwill::GoodwillParams {
            alpha_r: p.get("alpha_R"),
            alpha_m: p.get("alpha_M"),
            beta: p.get("beta"),
            eta: p.get("eta"),
            mu: p.get("mu"),
            rho: p.get("rho"),
            theta: p.get("theta"),
            tau: p.get("tau"),
            phi: p.get("phi"),
            omega: p.get("omega"),
            cap_p: p.get("P"),
        }),
        ModelId::SeirAsei => Kernel::Asei(host_vector::AseiParams {
            hv: host_vector_params(p),
            eta_m: p.get("eta_m"),
            nu_h: p.get("nu_h"),
        }),
        ModelId::SirAsi => Kernel::Asi(host_vector_params(p)),
        ModelId::SvirPediatric
        | ModelId::SvirMass
        | ModelId::SvirImperfect
        | ModelId::SvirWaning => {
            let kind = match id {
                ModelId::SvirPediatric => SvirKind::Pediatric,
                ModelId::SvirMass => SvirKind::Mass,
                ModelId::SvirImperfect => SvirKind::Imperfect,
                _ => SvirKind::Waning,
            };
            Kernel::Svir(host_vector::SvirParams {
                hv: host_vector_params(p),
                kind,
                p: p.try_get("p").unwrap_or(0.0),
                psi: p.try_get("psi").unwrap_or(0.0),
                sigma: p.try_get("sigma").unwrap_or(0.0),
                theta: p.try_get("theta").unwrap_or(0.0),
            })
        }
        ModelId::SirAsiVaccineControl => Kernel::Vaccine(host_vector::VaccineParams {
            hv: host_vector_params(p),
            theta: p.get("theta"),
        }),
        ModelId::Rubella => Kernel::Rubella(rubella::RubellaParams {
            b: p.get("b"),
            e: p.get("e"),
            g: p.get("g"),
            p: p.get("p"),
            q: p.get("q"),
            beta: p.get("beta"),
        }),
    }
}

impl ModelDefinition {
    /// Model in absolute (natural) units.
    pub fn new(id: ModelId) -> Self {
        ModelDefinition {
            id,
            normalized: false,
        }
    }

    /// Fractional form; only host-vector models have one.
    pub fn normalized(id: ModelId) -> Result<Self, ModelError> {
        if !id.is_host_vector() {
            return Err(ModelError::NoNormalizedForm(id));
        }
        Ok(ModelDefinition {
            id,
            normalized: true,
        })
    }

    pub fn for_scenario(s: &Scenario) -> Self {
        ModelDefinition {
            id: s.model,
            normalized: s.normalized,
        }
    }

    pub fn id(&self) -> ModelId {
        self.id
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn state_dim(&self) -> usize {
        self.id.state_dim()
    }

    pub fn control_dim(&self) -> usize {
        self.id.control_dim()
    }

    pub fn state_names(&self) -> &'static [&'static str] {
        self.id.state_names(self.normalized)
    }

    pub fn is_oc_enabled(&self) -> bool {
        self.id.is_oc_enabled()
    }

    fn check_dims(&self, x: &[f64], u: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.state_dim() {
            return Err(ModelError::Dimension(format!(
                "{} expects {} states, got {}",
                self.id,
                self.state_dim(),
                x.len()
            )));
        }
        if u.len() != self.control_dim() {
            return Err(ModelError::Dimension(format!(
                "{} expects {} controls, got {}",
                self.id,
                self.control_dim(),
                u.len()
            )));
        }
        Ok(())
    }

    fn eval_rhs(&self, kern: &Kernel, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) {
        match kern {
            Kernel::Sis(p) => classic::sis_rhs(p, x, dx),
            Kernel::Sir(p) => classic::sir_rhs(p, x, dx),
            Kernel::Seir(p) => classic::seir_rhs(p, x, dx),
            Kernel::Mseir(p) => classic::mseir_rhs(p, x, dx),
            Kernel::Seit(p) => classic::seit_rhs(p, x, dx),
            Kernel::Goodwill(p) => goodwill::rhs(p, t, x, u, dx),
            Kernel::Asei(p) => {
                if self.normalized {
                    host_vector::asei_rhs_norm(p, x, u, dx)
                } else {
                    host_vector::asei_rhs_abs(p, x, u, dx)
                }
            }
            Kernel::Asi(p) => {
                if self.normalized {
                    host_vector::asi_rhs_norm(p, x, u, dx)
                } else {
                    host_vector::asi_rhs_abs(p, x, u, dx)
                }
            }
            Kernel::Svir(p) => host_vector::svir_rhs(p, self.normalized, x, dx),
            Kernel::Vaccine(p) => {
                if self.normalized {
                    host_vector::vaccine_rhs_norm(p, x, u, dx)
                } else {
                    host_vector::vaccine_rhs_abs(p, x, u, dx)
                }
            }
            Kernel::Rubella(p) => rubella::rhs(p, x, u, dx),
        }
    }

    /// Evaluates the system right-hand side.
    pub fn rhs(
        &self,
        p: &ParameterSet,
        t: f64,
        x: &[f64],
        u: &[f64],
    ) -> Result<Vec<f64>, ModelError> {
        self.check_dims(x, u)?;
        let kern = kernel(self.id, p);
        let mut dx = vec![0.0; self.state_dim()];
        self.eval_rhs(&kern, t, x, u, &mut dx);
        Ok(dx)
    }

    /// A fast closure over extracted parameters, for the integrators.
    pub fn field<'a>(
        &self,
        p: &ParameterSet,
    ) -> impl Fn(f64, &[f64], &[f64], &mut [f64]) + 'a {
        let def = *self;
        let kern = kernel(self.id, p);
        move |t, x, u, dx| def.eval_rhs(&kern, t, x, u, dx)
    }

    /// Instantaneous running cost of the model's objective.
    pub fn running_cost(
        &self,
        weights: &BTreeMap<String, f64>,
        _t: f64,
        x: &[f64],
        u: &[f64],
    ) -> f64 {
        match self.id {
            ModelId::DengueGoodwill => goodwill::running_cost(
                &goodwill::GoodwillWeights {
                    gamma_d: weight(weights, "gamma_D"),
                    gamma_s: weight(weights, "gamma_S"),
                    gamma_e: weight(weights, "gamma_E"),
                },
                x,
                u,
            ),
            ModelId::SeirAsei => host_vector::asei_running_cost(
                weight(weights, "gamma_D"),
                weight(weights, "gamma_S"),
                x,
                u,
            ),
            ModelId::SirAsi => host_vector::asi_running_cost(
                &host_vector::AsiWeights {
                    gamma_d: weight(weights, "gamma_D"),
                    gamma_s: weight(weights, "gamma_S"),
                    gamma_l: weight(weights, "gamma_L"),
                    gamma_e: weight(weights, "gamma_E"),
                },
                x,
                u,
            ),
            ModelId::SirAsiVaccineControl => host_vector::vaccine_running_cost(
                weight(weights, "gamma_D"),
                weight(weights, "gamma_V"),
                x,
                u,
            ),
            ModelId::Rubella => rubella::running_cost(weight(weights, "A"), x, u),
            _ => 0.0,
        }
    }

    fn require_oc(&self) -> Result<(), ModelError> {
        if !self.is_oc_enabled() {
            return Err(ModelError::NotOcEnabled(self.id));
        }
        // host-vector OC layers are defined on the fractional form
        if self.id.is_host_vector() && !self.normalized {
            return Err(ModelError::RequiresNormalizedForm(self.id));
        }
        Ok(())
    }

    /// Adjoint right-hand side `-dH/dx`.
    pub fn adjoint_rhs(
        &self,
        p: &ParameterSet,
        weights: &BTreeMap<String, f64>,
        t: f64,
        x: &[f64],
        lambda: &[f64],
        u: &[f64],
    ) -> Result<Vec<f64>, ModelError> {
        self.require_oc()?;
        self.check_dims(x, u)?;
        if lambda.len() != self.state_dim() {
            return Err(ModelError::Dimension("costate length".into()));
        }
        let kern = kernel(self.id, p);
        let mut dl = vec![0.0; self.state_dim()];
        match &kern {
            Kernel::Goodwill(gp) => goodwill::adjoint_rhs(
                gp,
                &goodwill::GoodwillWeights {
                    gamma_d: weight(weights, "gamma_D"),
                    gamma_s: weight(weights, "gamma_S"),
                    gamma_e: weight(weights, "gamma_E"),
                },
                t,
                x,
                lambda,
                u,
                &mut dl,
            ),
            Kernel::Asei(ap) => host_vector::asei_adjoint_norm(
                ap,
                weight(weights, "gamma_D"),
                x,
                lambda,
                u,
                &mut dl,
            ),
            Kernel::Asi(q) => host_vector::asi_adjoint_norm(
                q,
                &host_vector::AsiWeights {
                    gamma_d: weight(weights, "gamma_D"),
                    gamma_s: weight(weights, "gamma_S"),
                    gamma_l: weight(weights, "gamma_L"),
                    gamma_e: weight(weights, "gamma_E"),
                },
                x,
                lambda,
                u,
                &mut dl,
            ),
            Kernel::Vaccine(vp) => host_vector::vaccine_adjoint_norm(
                vp,
                weight(weights, "gamma_D"),
                x,
                lambda,
                u,
                &mut dl,
            ),
            Kernel::Rubella(rp) => {
                rubella::adjoint_rhs(rp, weight(weights, "A"), x, lambda, u, &mut dl)
            }
            _ => unreachable!("require_oc filtered non-OC models"),
        }
        Ok(dl)
    }

    /// Pointwise Hamiltonian minimizer projected onto the control box.
    pub fn control_law(
        &self,
        p: &ParameterSet,
        weights: &BTreeMap<String, f64>,
        x: &[f64],
        lambda: &[f64],
        bounds: &[(f64, f64)],
    ) -> Result<Vec<f64>, ModelError> {
        self.require_oc()?;
        if bounds.len() != self.control_dim() {
            return Err(ModelError::Dimension("control bounds length".into()));
        }
        let kern = kernel(self.id, p);
        let mut u = vec![0.0; self.control_dim()];
        match &kern {
            Kernel::Goodwill(_) => goodwill::control_law(
                &goodwill::GoodwillWeights {
                    gamma_d: weight(weights, "gamma_D"),
                    gamma_s: weight(weights, "gamma_S"),
                    gamma_e: weight(weights, "gamma_E"),
                },
                lambda,
                bounds,
                &mut u,
            ),
            Kernel::Asei(_) => host_vector::asei_control_law(
                weight(weights, "gamma_S"),
                x,
                lambda,
                bounds,
                &mut u,
            ),
            Kernel::Asi(q) => host_vector::asi_control_law(
                q,
                &host_vector::AsiWeights {
                    gamma_d: weight(weights, "gamma_D"),
                    gamma_s: weight(weights, "gamma_S"),
                    gamma_l: weight(weights, "gamma_L"),
                    gamma_e: weight(weights, "gamma_E"),
                },
                x,
                lambda,
                bounds,
                &mut u,
            ),
            Kernel::Vaccine(vp) => host_vector::vaccine_control_law(
                vp,
                weight(weights, "gamma_V"),
                x,
                lambda,
                bounds,
                &mut u,
            ),
            Kernel::Rubella(_) => rubella::control_law(x, lambda, bounds, &mut u),
            _ => unreachable!("require_oc filtered non-OC models"),
        }
        Ok(u)
    }

    /// `H = running_cost + lambda . rhs`.
    pub fn hamiltonian(
        &self,
        p: &ParameterSet,
        weights: &BTreeMap<String, f64>,
        t: f64,
        x: &[f64],
        lambda: &[f64],
        u: &[f64],
    ) -> Result<f64, ModelError> {
        self.require_oc()?;
        let dx = self.rhs(p, t, x, u)?;
        let dot: f64 = lambda.iter().zip(&dx).map(|(l, d)| l * d).sum();
        Ok(self.running_cost(weights, t, x, u) + dot)
    }

    /// Rate of new human infections, used for attack-rate accounting.
    pub fn incidence(&self, p: &ParameterSet, _t: f64, x: &[f64]) -> f64 {
        let kern = kernel(self.id, p);
        match &kern {
            Kernel::Sis(cp) => cp.beta * x[0] * x[1],
            Kernel::Sir(cp) => cp.beta * x[0] * x[1],
            Kernel::Seir(cp) => cp.beta * x[0] * x[2],
            Kernel::Mseir(cp) => cp.beta * x[1] * x[3],
            Kernel::Seit(cp) => cp.beta1 * x[2] * x[0] + cp.beta2 * x[2] * x[3],
            Kernel::Goodwill(gp) => goodwill::incidence(gp, x),
            Kernel::Asei(ap) => {
                let q = &ap.hv;
                if self.normalized {
                    q.b * q.beta_mh * q.m * x[7] * x[0]
                } else {
                    q.b * q.beta_mh * x[7] / q.nh * x[0]
                }
            }
            Kernel::Asi(q) => {
                if self.normalized {
                    q.b * q.beta_mh * q.m * x[5] * x[0]
                } else {
                    q.b * q.beta_mh * x[5] / q.nh * x[0]
                }
            }
            Kernel::Svir(sp) => {
                let q = &sp.hv;
                let sigma = if sp.kind == SvirKind::Imperfect {
                    sp.sigma
                } else {
                    0.0
                };
                let exposed = x[0] + sigma * x[1];
                if self.normalized {
                    q.b * q.beta_mh * q.m * x[6] * exposed
                } else {
                    q.b * q.beta_mh * x[6] / q.nh * exposed
                }
            }
            Kernel::Vaccine(vp) => {
                let q = &vp.hv;
                if self.normalized {
                    q.b * q.beta_mh * q.m * x[5] * x[0]
                } else {
                    q.b * q.beta_mh * x[5] / q.nh * x[0]
                }
            }
            Kernel::Rubella(rp) => rubella::incidence(rp, x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sir_asi_rhs_matches_hand_substitution() {
        // zero-control SIR+ASI at the outbreak initial state, written out
        // term by term with independent arithmetic
        let s = presets::cape_verde_sir_asi_absolute();
        let def = ModelDefinition::new(ModelId::SirAsi);
        let x = [479990.0, 10.0, 0.0, 1_440_000.0, 1_440_000.0, 0.0];
        let u = [0.0, 0.0, 1.0];
        let dx = def.rhs(&s.params, 0.0, &x, &u).unwrap();

        let nh: f64 = 480000.0;
        let mu_h: f64 = 1.0 / (71.0 * 365.0);
        let eta_h: f64 = 1.0 / 3.0;
        let mu_m: f64 = 0.1;
        let b: f64 = 0.8;
        let beta: f64 = 0.375;
        let expected: [f64; 6] = [
            mu_h * nh - (b * beta * 0.0 / nh + mu_h) * 479990.0,
            b * beta * 0.0 / nh * 479990.0 - (eta_h + mu_h) * 10.0,
            eta_h * 10.0 - mu_h * 0.0,
            6.0 * (1.0 - 1_440_000.0 / (1.0 * 3.0 * nh)) * 1_440_000.0
                - (0.08 + 0.25 + 0.0) * 1_440_000.0,
            0.08 * 1_440_000.0 - (b * beta * 10.0 / nh + mu_m + 0.0) * 1_440_000.0,
            b * beta * 10.0 / nh * 1_440_000.0 - (mu_m + 0.0) * 0.0,
        ];
        for i in 0..6 {
            assert_abs_diff_eq!(dx[i], expected[i], epsilon = 1e-9 * expected[i].abs().max(1.0));
        }
        // one Euler step with h = 0.05 built on the same evaluation
        let next =
            crate::integrators::step_euler(&def.field(&s.params), 0.0, &x, &u, 0.05).unwrap();
        for i in 0..6 {
            assert_abs_diff_eq!(
                next[i],
                x[i] + 0.05 * expected[i],
                epsilon = 1e-9 * x[i].abs().max(1.0)
            );
        }
    }

    #[test]
    fn sir_asi_realistic_dfe_is_stationary() {
        // substitute the closed-form sustainable-mosquito equilibrium
        let s = presets::cape_verde_sir_asi_absolute();
        let p = &s.params;
        let nh = p.get("N_h");
        let m_qty = p.get("varphi") * p.get("eta_A")
            - (p.get("eta_A") + p.get("mu_A")) * p.get("mu_m");
        let am = p.get("k") * nh * m_qty / (p.get("eta_A") * p.get("varphi"));
        let sm = p.get("k") * nh * m_qty / (p.get("varphi") * p.get("mu_m"));
        let x = [nh, 0.0, 0.0, am, sm, 0.0];
        let def = ModelDefinition::new(ModelId::SirAsi);
        let dx = def.rhs(p, 0.0, &x, &[0.0, 0.0, 1.0]).unwrap();
        for v in &dx {
            assert!(v.abs() < 1e-10 * nh, "residual {v:.3e}");
        }
    }

    #[test]
    fn unclamped_control_law_is_a_hamiltonian_critical_point() {
        let s = presets::cape_verde_seir_asei();
        let def = ModelDefinition::for_scenario(&s);
        let x = [0.9, 0.02, 0.01, 0.05, 0.8, 0.7, 0.1, 0.05];
        let l = [0.3, -0.2, 0.5, 0.0, 0.1, 0.4, 0.2, 0.6];
        let wide = [(-1e9, 1e9)];
        let u = def
            .control_law(&s.params, &s.weights, &x, &l, &wide)
            .unwrap();
        let h = 1e-6;
        let hp = def
            .hamiltonian(&s.params, &s.weights, 0.0, &x, &l, &[u[0] + h])
            .unwrap();
        let hm = def
            .hamiltonian(&s.params, &s.weights, 0.0, &x, &l, &[u[0] - h])
            .unwrap();
        assert_abs_diff_eq!((hp - hm) / (2.0 * h), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn seir_asei_trivial_equilibrium_is_stationary() {
        let s = presets::cape_verde_seir_asei_absolute();
        let def = ModelDefinition::new(ModelId::SeirAsei);
        let nh = s.params.get("N_h");
        let x = [nh, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let dx = def.rhs(&s.params, 0.0, &x, &[0.0]).unwrap();
        for v in &dx {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12 * nh);
        }
    }

    #[test]
    fn rubella_rhs_matches_hand_substitution() {
        let def = ModelDefinition::new(ModelId::Rubella);
        let p = presets::rubella().params;
        let x = [0.0555, 0.0003, 0.0004, 1.0];
        let dx = def.rhs(&p, 0.0, &x, &[0.0]).unwrap();

        let (b, e, g, pp, q, beta) = (0.012, 36.5, 30.417, 0.65, 0.65, 527.59);
        let expected = [
            b - b * (pp * 0.0003 + q * 0.0004) - b * 0.0555 - beta * 0.0555 * 0.0004,
            b * pp * 0.0003 + beta * 0.0555 * 0.0004 - (e + b) * 0.0003,
            e * 0.0003 - (g + b) * 0.0004,
            b - b * 1.0,
        ];
        for i in 0..4 {
            assert_abs_diff_eq!(dx[i], expected[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn asei_adjoint_vanishes_with_zero_costate_and_no_infection() {
        let s = presets::cape_verde_seir_asei();
        let def = ModelDefinition::for_scenario(&s);
        let x = [0.9, 0.05, 0.0, 0.05, 0.8, 0.7, 0.1, 0.2];
        let l = [0.0; 8];
        let dl = def
            .adjoint_rhs(&s.params, &s.weights, 0.0, &x, &l, &[0.3])
            .unwrap();
        for v in &dl {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn rubella_adjoint_with_zero_costate_reads_cost_gradient() {
        let s = presets::rubella();
        let def = ModelDefinition::for_scenario(&s);
        let x = [0.4, 0.01, 0.02, 1.0];
        let dl = def
            .adjoint_rhs(&s.params, &s.weights, 0.0, &x, &[0.0; 4], &[0.1])
            .unwrap();
        assert_eq!(dl[0], 0.0);
        assert_eq!(dl[1], 0.0);
        assert_abs_diff_eq!(dl[2], -100.0, epsilon = 1e-12);
        assert_eq!(dl[3], 0.0);
    }

    #[test]
    fn vaccine_adjoint_component_four_reads_aquatic_terms() {
        let s = presets::vaccine_epidemic();
        let def = ModelDefinition::for_scenario(&s);
        let p = &s.params;
        let x = [0.9, 0.01, 0.02, 0.5, 0.6, 0.1];
        let mut l = [0.0; 6];
        l[3] = 1.0;
        let dl = def
            .adjoint_rhs(p, &s.weights, 0.0, &x, &l, &[0.2])
            .unwrap();
        // phi (s_m + i_m) m/k + (eta_A + mu_A); equals the absolute-form
        // reading phi (S_m + I_m)/(k N_h) + (eta_A + mu_A)
        let expected =
            p.get("varphi") * p.get("m") / p.get("k") * (0.6 + 0.1) + p.get("eta_A") + p.get("mu_A");
        assert_abs_diff_eq!(dl[3], expected, epsilon = 1e-12);
    }

    #[test]
    fn control_law_zero_costate_gives_lower_bound() {
        let s = presets::cape_verde_seir_asei();
        let def = ModelDefinition::for_scenario(&s);
        let x = [0.9, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        let u = def
            .control_law(&s.params, &s.weights, &x, &[0.0; 8], &[(0.0, 1.0)])
            .unwrap();
        assert_eq!(u[0], 0.0);
    }

    #[test]
    fn asei_control_law_clamps_at_upper_bound() {
        let s = presets::cape_verde_seir_asei();
        let def = ModelDefinition::for_scenario(&s);
        // lambda . (s_m, e_m, i_m) = 10 with gamma_S = 0.5 exceeds 1
        let x = [0.9, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        let mut l = [0.0; 8];
        (l[5], l[6], l[7]) = (5.0, 2.0, 3.0);
        let u = def
            .control_law(&s.params, &s.weights, &x, &l, &[(0.0, 1.0)])
            .unwrap();
        assert_eq!(u[0], 1.0);
    }

    #[test]
    fn vaccine_control_law_clamps_large_interior_value() {
        let s = presets::vaccine_epidemic();
        let def = ModelDefinition::for_scenario(&s);
        let theta = s.params.get("theta");
        // pick s_h - theta r_h = 400000 and lambda_1 - lambda_3 = 0.02:
        // interior value 8000 with gamma_V = 0.5, clamped to 1
        let mut x = [0.0; 6];
        x[0] = 400000.0 + theta * 50.0;
        x[2] = 50.0;
        let mut l = [0.0; 6];
        l[0] = 0.02;
        let u = def
            .control_law(&s.params, &s.weights, &x, &l, &[(0.0, 1.0)])
            .unwrap();
        assert_eq!(u[0], 1.0);
    }

    #[test]
    fn zero_weight_control_law_degrades_to_bang_bang() {
        let mut s = presets::cape_verde_seir_asei();
        s.weights.insert("gamma_D".into(), 1.0);
        s.weights.insert("gamma_S".into(), 0.0);
        let def = ModelDefinition::for_scenario(&s);
        let x = [0.9, 0.0, 0.0, 0.0, 1.0, 1.0, 0.5, 0.2];
        let mut l = [0.0; 8];
        l[5] = 0.4;
        let u = def
            .control_law(&s.params, &s.weights, &x, &l, &[(0.0, 1.0)])
            .unwrap();
        assert_eq!(u[0], 1.0);
        l[5] = -0.4;
        let u = def
            .control_law(&s.params, &s.weights, &x, &l, &[(0.0, 1.0)])
            .unwrap();
        assert_eq!(u[0], 0.0);
        // the degenerate all-zero coefficient stays finite at the bound
        let u = def
            .control_law(&s.params, &s.weights, &x, &[0.0; 8], &[(0.0, 1.0)])
            .unwrap();
        assert_eq!(u[0], 0.0);
    }

    #[test]
    fn hamiltonian_zero_cost_zero_costate_is_zero() {
        let s = presets::cape_verde_seir_asei();
        let def = ModelDefinition::for_scenario(&s);
        let x = [1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]; // i_h = 0
        let h = def
            .hamiltonian(&s.params, &s.weights, 0.0, &x, &[0.0; 8], &[0.0])
            .unwrap();
        assert_abs_diff_eq!(h, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn adjoint_needs_normalized_host_vector_form() {
        let s = presets::cape_verde_seir_asei_absolute();
        let def = ModelDefinition::for_scenario(&s);
        let err = def
            .adjoint_rhs(&s.params, &s.weights, 0.0, &[0.0; 8], &[0.0; 8], &[0.0])
            .unwrap_err();
        assert!(matches!(err, ModelError::RequiresNormalizedForm(_)));
    }

    #[test]
    fn non_oc_models_have_no_adjoint() {
        let s = presets::influenza();
        let def = ModelDefinition::for_scenario(&s);
        let err = def
            .adjoint_rhs(&s.params, &s.weights, 0.0, &[1.0, 0.0, 0.0], &[0.0; 3], &[])
            .unwrap_err();
        assert!(matches!(err, ModelError::NotOcEnabled(_)));
    }
}
