//! Threshold analysis: basic reproduction numbers (closed form and next
//! generation matrix), equilibrium points, local stability classification
//! and critical control levels.
//!
//! Analysis always runs on the absolute (unnormalized) form of a model
//! with constant control levels. Control names (`c`, `c_m`, ...) are
//! accepted as threshold knobs alongside parameter names.

use thiserror::Error;

use crate::integrators::{self, Method};
use crate::linalg::{self, Mat};
use crate::models::ModelDefinition;
use crate::scenario::{ModelId, ParameterSet};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{what} is not defined for model {model}")]
    NotDefined { model: ModelId, what: &'static str },
    #[error("mosquito population not sustainable (offspring quantity M = {m:.6} <= 0)")]
    MosquitoCollapse { m: f64 },
    #[error("bracket [{lo}, {hi}] does not straddle R0 = 1 (R0 = {r0_lo:.6} and {r0_hi:.6})")]
    Bracket {
        lo: f64,
        hi: f64,
        r0_lo: f64,
        r0_hi: f64,
    },
    #[error("unknown knob `{0}`")]
    UnknownKnob(String),
    #[error("equilibrium residual {residual:e} exceeds tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },
    #[error("Newton iteration did not converge (best residual {residual:e})")]
    NewtonStalled { residual: f64 },
    #[error("singular transition matrix V")]
    SingularV,
    #[error("integration failed while seeding the endemic search: {0}")]
    Seed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum R0Method {
    ClosedForm,
    NextGeneration,
}

/// Threshold value with method provenance.
#[derive(Debug, Clone)]
pub struct R0Report {
    pub value: f64,
    pub method: R0Method,
    pub model: ModelId,
    pub params_hash: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    TrivialDfe,
    Brdfe,
    Endemic,
}

impl EquilibriumKind {
    pub fn label(&self) -> &'static str {
        match self {
            EquilibriumKind::TrivialDfe => "trivial_DFE",
            EquilibriumKind::Brdfe => "BRDFE",
            EquilibriumKind::Endemic => "endemic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn label(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EquilibriumPoint {
    pub state: Vec<f64>,
    pub kind: EquilibriumKind,
    pub residual: f64,
    pub stability: Option<Stability>,
    pub leading_eigenvalue_real_part: Option<f64>,
}

pub const RESIDUAL_TOL: f64 = 1e-8;
pub const STABILITY_TOL: f64 = 1e-7;

fn params_hash(p: &ParameterSet, controls: &[f64]) -> String {
    let mut text = String::new();
    for (k, v) in p.entries() {
        text.push_str(&format!("{k}={v:e};"));
    }
    for c in controls {
        text.push_str(&format!("u={c:e};"));
    }
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

/// Mosquito offspring quantity: positive iff the mosquito population is
/// sustainable. Larvicide and adulticide raise the aquatic and adult exit
/// rates respectively.
pub fn offspring_quantity(
    model: ModelId,
    p: &ParameterSet,
    controls: &[f64],
) -> Result<f64, AnalysisError> {
    let (aquatic_exit, adult_exit) = match model {
        ModelId::SeirAsei => (p.get("eta_A") + p.get("mu_A"), p.get("mu_m") + controls[0]),
        ModelId::SirAsi => (
            p.get("eta_A") + p.get("mu_A") + controls[0],
            p.get("mu_m") + controls[1],
        ),
        ModelId::SvirPediatric
        | ModelId::SvirMass
        | ModelId::SvirImperfect
        | ModelId::SvirWaning
        | ModelId::SirAsiVaccineControl => (p.get("eta_A") + p.get("mu_A"), p.get("mu_m")),
        _ => {
            return Err(AnalysisError::NotDefined {
                model,
                what: "mosquito offspring quantity",
            })
        }
    };
    Ok(p.get("varphi") * p.get("eta_A") - aquatic_exit * adult_exit)
}

fn svir_base_r0(p: &ParameterSet) -> Result<f64, AnalysisError> {
    let m0 = p.get("varphi") * p.get("eta_A") - (p.get("eta_A") + p.get("mu_A")) * p.get("mu_m");
    if m0 <= 0.0 {
        return Err(AnalysisError::MosquitoCollapse { m: m0 });
    }
    let num = p.get("k") * p.get("B") * p.get("B") * p.get("beta_hm") * p.get("beta_mh") * m0;
    let den =
        p.get("varphi") * (p.get("eta_h") + p.get("mu_h")) * p.get("mu_m") * p.get("mu_m");
    Ok((num / den).sqrt())
}

/// The model's closed-form basic reproduction number, evaluated at the
/// given constant control levels.
pub fn closed_form_r0(
    model: ModelId,
    p: &ParameterSet,
    controls: &[f64],
) -> Result<R0Report, AnalysisError> {
    let value = match model {
        ModelId::Sis | ModelId::SirNoDemo => p.get("beta") / p.get("gamma"),
        ModelId::SirDemo => p.get("beta") / (p.get("gamma") + p.get("mu")),
        ModelId::Seir | ModelId::Mseir => {
            p.get("beta") * p.get("nu")
                / ((p.get("gamma") + p.get("mu")) * (p.get("nu") + p.get("mu")))
        }
        ModelId::Seit => {
            let (mu, nu, q, r1, r2) = (
                p.get("mu"),
                p.get("nu"),
                p.get("q"),
                p.get("r1"),
                p.get("r2"),
            );
            p.get("beta1") * nu / ((nu + r1 + mu) * (r2 + mu) - nu * (1.0 - q) * r2)
        }
        ModelId::SeirAsei => {
            let c = controls[0];
            let m = offspring_quantity(model, p, controls)?;
            if m <= 0.0 {
                return Err(AnalysisError::MosquitoCollapse { m });
            }
            let (b, mu_m, eta_m, nu_h) =
                (p.get("B"), p.get("mu_m"), p.get("eta_m"), p.get("nu_h"));
            let num = b * b * p.get("k") * p.get("beta_hm") * p.get("beta_mh") * eta_m * nu_h * m;
            let den = p.get("varphi")
                * mu_m
                * (p.get("eta_h") + p.get("mu_h"))
                * (c + mu_m)
                * (c + eta_m + mu_m)
                * (p.get("mu_h") + nu_h);
            (num / den).sqrt()
        }
        ModelId::SirAsi => {
            let (_ca, cm, alpha) = (controls[0], controls[1], controls[2]);
            let m = offspring_quantity(model, p, controls)?;
            if m <= 0.0 {
                return Err(AnalysisError::MosquitoCollapse { m });
            }
            let b = p.get("B");
            let num = alpha * p.get("k") * b * b * p.get("beta_hm") * p.get("beta_mh") * m;
            let mm = cm + p.get("mu_m");
            let den = p.get("varphi") * (p.get("eta_h") + p.get("mu_h")) * mm * mm;
            (num / den).sqrt()
        }
        ModelId::SvirPediatric => (1.0 - p.get("p")) * svir_base_r0(p)?,
        ModelId::SvirMass | ModelId::SvirWaning => {
            // waning immunity does not change the threshold itself
            svir_base_r0(p)? * p.get("mu_h") / (p.get("mu_h") + p.get("psi"))
        }
        ModelId::SvirImperfect => {
            (1.0 + p.get("sigma") * p.get("psi")) * svir_base_r0(p)? * p.get("mu_h")
                / (p.get("mu_h") + p.get("psi"))
        }
        ModelId::SirAsiVaccineControl => svir_base_r0(p)?,
        ModelId::DengueGoodwill | ModelId::Rubella => {
            return Err(AnalysisError::NotDefined {
                model,
                what: "closed-form R0",
            })
        }
    };
    Ok(R0Report {
        value,
        method: R0Method::ClosedForm,
        model,
        params_hash: params_hash(p, controls),
    })
}

/// Rates of new infections into each infected compartment.
type NewInfections = Box<dyn Fn(&[f64]) -> Vec<f64>>;

/// Infected-compartment indices and the new-infection rates feeding them.
fn infected_partition(
    model: ModelId,
    p: &ParameterSet,
) -> Option<(Vec<usize>, NewInfections)> {
    match model {
        ModelId::Sis | ModelId::SirNoDemo | ModelId::SirDemo => {
            let beta = p.get("beta");
            Some((
                vec![1],
                Box::new(move |x: &[f64]| vec![beta * x[0] * x[1]]),
            ))
        }
        ModelId::Seir => {
            let beta = p.get("beta");
            Some((
                vec![1, 2],
                Box::new(move |x: &[f64]| vec![beta * x[0] * x[2], 0.0]),
            ))
        }
        ModelId::Mseir => {
            let beta = p.get("beta");
            Some((
                vec![2, 3],
                Box::new(move |x: &[f64]| vec![beta * x[1] * x[3], 0.0]),
            ))
        }
        ModelId::Seit => {
            let (b1, b2) = (p.get("beta1"), p.get("beta2"));
            Some((
                vec![1, 2],
                Box::new(move |x: &[f64]| vec![b1 * x[2] * x[0] + b2 * x[2] * x[3], 0.0]),
            ))
        }
        ModelId::SeirAsei => {
            let (b, bmh, bhm, nh) = (
                p.get("B"),
                p.get("beta_mh"),
                p.get("beta_hm"),
                p.get("N_h"),
            );
            Some((
                vec![1, 2, 6, 7],
                Box::new(move |x: &[f64]| {
                    vec![
                        b * bmh * x[7] / nh * x[0],
                        0.0,
                        b * bhm * x[2] / nh * x[5],
                        0.0,
                    ]
                }),
            ))
        }
        ModelId::SirAsi | ModelId::SirAsiVaccineControl => {
            let (b, bmh, bhm, nh) = (
                p.get("B"),
                p.get("beta_mh"),
                p.get("beta_hm"),
                p.get("N_h"),
            );
            Some((
                vec![1, 5],
                Box::new(move |x: &[f64]| {
                    vec![b * bmh * x[5] / nh * x[0], b * bhm * x[1] / nh * x[4]]
                }),
            ))
        }
        ModelId::SvirPediatric
        | ModelId::SvirMass
        | ModelId::SvirImperfect
        | ModelId::SvirWaning => {
            let (b, bmh, bhm, nh) = (
                p.get("B"),
                p.get("beta_mh"),
                p.get("beta_hm"),
                p.get("N_h"),
            );
            let sigma = if model == ModelId::SvirImperfect {
                p.get("sigma")
            } else {
                0.0
            };
            Some((
                vec![2, 6],
                Box::new(move |x: &[f64]| {
                    vec![
                        b * bmh * x[6] / nh * (x[0] + sigma * x[1]),
                        b * bhm * x[2] / nh * x[5],
                    ]
                }),
            ))
        }
        ModelId::DengueGoodwill | ModelId::Rubella => None,
    }
}

fn autonomous_field<'a>(
    model: ModelId,
    p: &ParameterSet,
    controls: &'a [f64],
) -> impl Fn(&[f64]) -> Vec<f64> + 'a {
    let def = ModelDefinition::new(model);
    let f = def.field(p);
    let dim = model.state_dim();
    move |x: &[f64]| {
        let mut dx = vec![0.0; dim];
        f(0.0, x, controls, &mut dx);
        dx
    }
}

fn residual_of(field: &impl Fn(&[f64]) -> Vec<f64>, state: &[f64]) -> f64 {
    field(state)
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn state_scale(state: &[f64]) -> f64 {
    state.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()))
}

/// Spectral radius of `F V^{-1}` with both matrices assembled numerically
/// as Jacobians of the new-infection and transition terms at the DFE.
pub fn next_generation_r0(
    model: ModelId,
    p: &ParameterSet,
    controls: &[f64],
    dfe: &EquilibriumPoint,
) -> Result<R0Report, AnalysisError> {
    if dfe.kind == EquilibriumKind::Endemic {
        return Err(AnalysisError::NotDefined {
            model,
            what: "next-generation R0 at an endemic point",
        });
    }
    let (infected, new_inf) = infected_partition(model, p).ok_or(AnalysisError::NotDefined {
        model,
        what: "infected-compartment partition",
    })?;
    let field = autonomous_field(model, p, controls);
    let residual = residual_of(&field, &dfe.state);
    let tol = RESIDUAL_TOL * state_scale(&dfe.state);
    if residual > tol {
        return Err(AnalysisError::Residual { residual, tol });
    }

    let m = infected.len();
    let mut f_mat = Mat::zeros(m, m);
    let mut v_mat = Mat::zeros(m, m);
    // new-infection and transition terms are linear in each infected
    // component, so central differences are exact; a generous step keeps
    // cancellation noise below the 1e-10 comparison tolerance
    let scale = state_scale(&dfe.state);
    let step = 1e-3 * scale.max(1.0);
    let mut xp = dfe.state.clone();
    let mut xm = dfe.state.clone();
    for (j, idx) in infected.iter().enumerate() {
        xp[*idx] = dfe.state[*idx] + step;
        xm[*idx] = dfe.state[*idx] - step;
        let fp = new_inf(&xp);
        let fm = new_inf(&xm);
        let gp = field(&xp);
        let gm = field(&xm);
        for (i, row_idx) in infected.iter().enumerate() {
            let df = (fp[i] - fm[i]) / (2.0 * step);
            let dg = (gp[*row_idx] - gm[*row_idx]) / (2.0 * step);
            f_mat.set(i, j, df);
            v_mat.set(i, j, df - dg);
        }
        xp[*idx] = dfe.state[*idx];
        xm[*idx] = dfe.state[*idx];
    }

    let v_inv = linalg::invert(&v_mat).ok_or(AnalysisError::SingularV)?;
    let k = f_mat.matmul(&v_inv);
    Ok(R0Report {
        value: linalg::spectral_radius(&k),
        method: R0Method::NextGeneration,
        model,
        params_hash: params_hash(p, controls),
    })
}

fn point(state: Vec<f64>, kind: EquilibriumKind, residual: f64) -> EquilibriumPoint {
    EquilibriumPoint {
        state,
        kind,
        residual,
        stability: None,
        leading_eigenvalue_real_part: None,
    }
}

fn checked_point(
    field: &impl Fn(&[f64]) -> Vec<f64>,
    state: Vec<f64>,
    kind: EquilibriumKind,
) -> Result<EquilibriumPoint, AnalysisError> {
    let residual = residual_of(field, &state);
    let tol = RESIDUAL_TOL * state_scale(&state);
    if residual > tol {
        return Err(AnalysisError::Residual { residual, tol });
    }
    Ok(point(state, kind, residual))
}

/// Human compartments of the disease-free state (vaccination shifts part
/// of the population into the vaccinated class).
fn disease_free_humans(model: ModelId, p: &ParameterSet) -> Vec<f64> {
    let nh = match model {
        ModelId::SeirAsei
        | ModelId::SirAsi
        | ModelId::SirAsiVaccineControl
        | ModelId::SvirPediatric
        | ModelId::SvirMass
        | ModelId::SvirImperfect
        | ModelId::SvirWaning => p.get("N_h"),
        _ => 1.0,
    };
    match model {
        ModelId::SvirPediatric => {
            let pp = p.get("p");
            vec![(1.0 - pp) * nh, pp * nh, 0.0, 0.0]
        }
        ModelId::SvirMass | ModelId::SvirImperfect => {
            let (mu, psi) = (p.get("mu_h"), p.get("psi"));
            vec![mu * nh / (mu + psi), psi * nh / (mu + psi), 0.0, 0.0]
        }
        ModelId::SvirWaning => {
            let (mu, psi, theta) = (p.get("mu_h"), p.get("psi"), p.get("theta"));
            let s = nh * (theta + mu) / (theta + mu + psi);
            vec![s, psi * s / (theta + mu), 0.0, 0.0]
        }
        ModelId::SeirAsei => vec![nh, 0.0, 0.0, 0.0],
        ModelId::SirAsi | ModelId::SirAsiVaccineControl => vec![nh, 0.0, 0.0],
        _ => unreachable!("host-vector models only"),
    }
}

/// Sustainable-mosquito block of the disease-free state.
fn brdfe_mosquitoes(model: ModelId, p: &ParameterSet, controls: &[f64], m_qty: f64) -> Vec<f64> {
    let nh = p.get("N_h");
    let k = p.get("k");
    let (varphi, eta_a) = (p.get("varphi"), p.get("eta_A"));
    match model {
        ModelId::SeirAsei => {
            let c = controls[0];
            let am = k * nh * m_qty / (eta_a * varphi);
            let sm = k * nh * m_qty / (varphi * (p.get("mu_m") + c));
            vec![am, sm, 0.0, 0.0]
        }
        ModelId::SirAsi => {
            let (cm, alpha) = (controls[1], controls[2]);
            let am = alpha * k * nh * m_qty / (eta_a * varphi);
            let sm = alpha * k * nh * m_qty / (varphi * (p.get("mu_m") + cm));
            vec![am, sm, 0.0]
        }
        _ => {
            let am = k * nh * m_qty / (eta_a * varphi);
            let sm = k * nh * m_qty / (varphi * p.get("mu_m"));
            vec![am, sm, 0.0]
        }
    }
}

fn newton_refine(
    field: &impl Fn(&[f64]) -> Vec<f64>,
    seed: &[f64],
) -> Result<Vec<f64>, AnalysisError> {
    let mut x = seed.to_vec();
    let mut best = residual_of(field, &x);
    for _ in 0..200 {
        let scale = state_scale(&x);
        if best <= 1e-3 * RESIDUAL_TOL * scale {
            return Ok(x);
        }
        let jac = linalg::fd_jacobian(&|y: &[f64]| field(y), &x, 1e-7, 1e-7 * scale.max(1.0));
        let fx = field(&x);
        let step = match linalg::lu_solve(&jac, &fx) {
            Some(s) => s,
            None => return Err(AnalysisError::NewtonStalled { residual: best }),
        };
        // damped update: halve until the residual decreases
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x
                .iter()
                .zip(&step)
                .map(|(xi, si)| xi - damping * si)
                .collect();
            let r = residual_of(field, &trial);
            if r < best {
                x = trial;
                best = r;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let scale = state_scale(&x);
    if best <= RESIDUAL_TOL * scale {
        Ok(x)
    } else {
        Err(AnalysisError::NewtonStalled { residual: best })
    }
}

/// Runs the system toward its attractor to seed the endemic Newton search
/// (used by models without a reduction to a scalar equation).
fn late_time_seed(
    model: ModelId,
    p: &ParameterSet,
    controls: &[f64],
    start: &[f64],
    horizon: f64,
) -> Result<Vec<f64>, AnalysisError> {
    let def = ModelDefinition::new(model);
    let f = def.field(p);
    let n_nodes = 201;
    let times: Vec<f64> = (0..n_nodes)
        .map(|i| horizon * i as f64 / (n_nodes - 1) as f64)
        .collect();
    let control_rows = vec![controls.to_vec(); n_nodes];
    let traj = integrators::integrate(&f, &times, start, &control_rows, Method::Rk45)
        .map_err(|e| AnalysisError::Seed(e.to_string()))?;
    Ok(traj.final_state().to_vec())
}

fn endemic_via_newton(
    model: ModelId,
    p: &ParameterSet,
    controls: &[f64],
    field: &impl Fn(&[f64]) -> Vec<f64>,
    start: &[f64],
) -> Option<EquilibriumPoint> {
    for horizon in [500.0, 5000.0] {
        let seed = match late_time_seed(model, p, controls, start, horizon) {
            Ok(s) => s,
            Err(_) => continue,
        };
        if let Ok(state) = newton_refine(field, &seed) {
            let scale = state_scale(&state);
            let infected = state[model.infected_human_index()];
            let feasible = state.iter().all(|v| *v >= -1e-9 * scale);
            if feasible && infected > 1e-9 * scale {
                let residual = residual_of(field, &state);
                return Some(point(state, EquilibriumKind::Endemic, residual));
            }
        }
    }
    None
}

/// Given the human force of infection `f = B beta_mh I_m_eff / N_h`, every
/// other endemic component follows from the balance equations; the one
/// equation left over (susceptible-mosquito balance) becomes a scalar
/// root-finding problem in `f`.
fn host_vector_state_from_force(
    model: ModelId,
    p: &ParameterSet,
    controls: &[f64],
    force: f64,
) -> Option<Vec<f64>> {
    let nh = p.get("N_h");
    let b = p.get("B");
    let bmh = p.get("beta_mh");
    let bhm = p.get("beta_hm");
    let mu_h = p.get("mu_h");
    let eta_h = p.get("eta_h");
    let mu_m = p.get("mu_m");
    let eta_a = p.get("eta_A");
    let varphi = p.get("varphi");
    let k = p.get("k");
    let m_qty = offspring_quantity(model, p, controls).ok()?;
    if m_qty <= 0.0 {
        return None;
    }
    let i_m = force * nh / (b * bmh);
    match model {
        ModelId::SeirAsei => {
            let c = controls[0];
            let (nu_h, eta_m) = (p.get("nu_h"), p.get("eta_m"));
            let s_h = mu_h * nh / (force + mu_h);
            let e_h = force * s_h / (nu_h + mu_h);
            let i_h = nu_h * e_h / (eta_h + mu_h);
            let r_h = eta_h * i_h / mu_h;
            let e_m = (mu_m + c) * i_m / eta_m;
            let a_m = k * nh * m_qty / (eta_a * varphi);
            let s_m = (mu_m + eta_m + c) * e_m * nh / (b * bhm * i_h);
            Some(vec![s_h, e_h, i_h, r_h, a_m, s_m, e_m, i_m])
        }
        ModelId::SirAsi => {
            let (cm, alpha) = (controls[1], controls[2]);
            let s_h = mu_h * nh / (force + mu_h);
            let i_h = force * s_h / (eta_h + mu_h);
            let r_h = eta_h * i_h / mu_h;
            let a_m = alpha * k * nh * m_qty / (eta_a * varphi);
            let s_m = (mu_m + cm) * i_m * nh / (b * bhm * i_h);
            Some(vec![s_h, i_h, r_h, a_m, s_m, i_m])
        }
        ModelId::SirAsiVaccineControl => {
            let u = controls[0];
            let theta = p.get("theta");
            // R_h = a S_h from the recovered balance with I_h eliminated
            let a = (eta_h * force / (eta_h + mu_h) + u) / (theta * u + mu_h);
            let s_h = mu_h * nh / (force + mu_h + u - theta * u * a);
            let i_h = force * s_h / (eta_h + mu_h);
            let r_h = a * s_h;
            let a_m = k * nh * m_qty / (eta_a * varphi);
            let s_m = mu_m * i_m * nh / (b * bhm * i_h);
            Some(vec![s_h, i_h, r_h, a_m, s_m, i_m])
        }
        ModelId::SvirPediatric
        | ModelId::SvirMass
        | ModelId::SvirImperfect
        | ModelId::SvirWaning => {
            let (s_h, v_h, exposed) = match model {
                ModelId::SvirPediatric => {
                    let pp = p.get("p");
                    let s = (1.0 - pp) * mu_h * nh / (force + mu_h);
                    (s, pp * nh, s)
                }
                ModelId::SvirMass => {
                    let psi = p.get("psi");
                    let s = mu_h * nh / (force + psi + mu_h);
                    (s, psi * s / mu_h, s)
                }
                ModelId::SvirImperfect => {
                    let (psi, sigma) = (p.get("psi"), p.get("sigma"));
                    let s = mu_h * nh / (force + psi + mu_h);
                    let v = psi * s / (sigma * force + mu_h);
                    (s, v, s + sigma * v)
                }
                _ => {
                    let (psi, theta) = (p.get("psi"), p.get("theta"));
                    // dV = 0 gives V = psi S / (theta + mu_h)
                    let v_over_s = psi / (theta + mu_h);
                    let s = mu_h * nh / (force + psi + mu_h - theta * v_over_s);
                    (s, v_over_s * s, s)
                }
            };
            let i_h = force * exposed / (eta_h + mu_h);
            let r_h = eta_h * i_h / mu_h;
            let a_m = k * nh * m_qty / (eta_a * varphi);
            let s_m = mu_m * i_m * nh / (b * bhm * i_h);
            Some(vec![s_h, v_h, i_h, r_h, a_m, s_m, i_m])
        }
        _ => None,
    }
}

/// Endemic equilibrium of a host-vector model: bisection on the force of
/// infection, then a Newton polish of the full system.
fn host_vector_endemic(
    model: ModelId,
    p: &ParameterSet,
    controls: &[f64],
    field: &impl Fn(&[f64]) -> Vec<f64>,
) -> Option<EquilibriumPoint> {
    let mosquito_s_index = model.state_dim() - 2;
    let residual_at = |force: f64| -> Option<f64> {
        let state = host_vector_state_from_force(model, p, controls, force)?;
        Some(field(&state)[mosquito_s_index])
    };

    let scale = p.get("eta_h") + p.get("mu_h");
    let mut lo = 1e-12 * scale;
    let r_lo = residual_at(lo)?;
    if r_lo <= 0.0 {
        return None; // no growth at vanishing infection: disease-free only
    }
    let mut hi = scale;
    let mut r_hi = residual_at(hi)?;
    let mut expansions = 0;
    while r_hi > 0.0 {
        hi *= 4.0;
        r_hi = residual_at(hi)?;
        expansions += 1;
        if expansions > 40 {
            return None;
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let r_mid = residual_at(mid)?;
        if r_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-16 * hi {
            break;
        }
    }
    let seed = host_vector_state_from_force(model, p, controls, 0.5 * (lo + hi))?;
    let state = newton_refine(field, &seed).unwrap_or(seed);
    let scale = state_scale(&state);
    let infected = state[model.infected_human_index()];
    let feasible = state.iter().all(|v| *v >= -1e-9 * scale);
    let residual = residual_of(field, &state);
    if feasible && infected > 1e-9 * scale && residual <= RESIDUAL_TOL * scale {
        Some(point(state, EquilibriumKind::Endemic, residual))
    } else {
        None
    }
}

/// All biologically meaningful equilibria: closed-form disease-free points
/// evaluated directly, endemic points located numerically and verified to
/// machine-level residuals.
pub fn find_equilibria(
    model: ModelId,
    p: &ParameterSet,
    controls: &[f64],
) -> Result<Vec<EquilibriumPoint>, AnalysisError> {
    let field = autonomous_field(model, p, controls);
    let mut out = Vec::new();
    match model {
        ModelId::Sis => {
            out.push(checked_point(&field, vec![1.0, 0.0], EquilibriumKind::TrivialDfe)?);
            let r0 = closed_form_r0(model, p, controls)?.value;
            if r0 > 1.0 {
                let s = 1.0 / r0;
                out.push(checked_point(
                    &field,
                    vec![s, 1.0 - s],
                    EquilibriumKind::Endemic,
                )?);
            }
        }
        ModelId::SirNoDemo => {
            out.push(checked_point(
                &field,
                vec![1.0, 0.0, 0.0],
                EquilibriumKind::TrivialDfe,
            )?);
        }
        ModelId::SirDemo => {
            out.push(checked_point(
                &field,
                vec![1.0, 0.0, 0.0],
                EquilibriumKind::TrivialDfe,
            )?);
            let r0 = closed_form_r0(model, p, controls)?.value;
            if r0 > 1.0 {
                let (beta, mu) = (p.get("beta"), p.get("mu"));
                let i = mu / beta * (r0 - 1.0);
                let s = 1.0 / r0;
                out.push(checked_point(
                    &field,
                    vec![s, i, 1.0 - s - i],
                    EquilibriumKind::Endemic,
                )?);
            }
        }
        ModelId::Seir => {
            out.push(checked_point(
                &field,
                vec![1.0, 0.0, 0.0, 0.0],
                EquilibriumKind::TrivialDfe,
            )?);
            let r0 = closed_form_r0(model, p, controls)?.value;
            if r0 > 1.0 {
                let (beta, gamma, mu, nu) =
                    (p.get("beta"), p.get("gamma"), p.get("mu"), p.get("nu"));
                let s = 1.0 / r0;
                let e = mu * (mu + gamma) / (beta * nu) * (r0 - 1.0);
                let i = mu / beta * (r0 - 1.0);
                let r = gamma / beta * (r0 - 1.0);
                out.push(checked_point(
                    &field,
                    vec![s, e, i, r],
                    EquilibriumKind::Endemic,
                )?);
            }
        }
        ModelId::Mseir => {
            out.push(checked_point(
                &field,
                vec![0.0, 1.0, 0.0, 0.0, 0.0],
                EquilibriumKind::TrivialDfe,
            )?);
            let r0 = closed_form_r0(model, p, controls)?.value;
            if r0 > 1.0 {
                let (gamma, mu, nu, delta) =
                    (p.get("gamma"), p.get("mu"), p.get("nu"), p.get("delta"));
                let frac = 1.0 - 1.0 / r0;
                let m = mu / (delta + mu) * frac;
                let s = 1.0 / r0;
                let e = delta * mu / ((delta + mu) * (nu + mu)) * frac;
                let i = delta * nu * mu / ((delta + mu) * (nu + mu) * (gamma + mu)) * frac;
                let r = 1.0 - m - s - e - i;
                out.push(checked_point(
                    &field,
                    vec![m, s, e, i, r],
                    EquilibriumKind::Endemic,
                )?);
            }
        }
        ModelId::Seit => {
            let dfe = checked_point(
                &field,
                vec![1.0, 0.0, 0.0, 0.0],
                EquilibriumKind::TrivialDfe,
            )?;
            let r0 = closed_form_r0(model, p, controls)?.value;
            let dfe_state = dfe.state.clone();
            out.push(dfe);
            if r0 > 1.0 {
                let mut start = dfe_state;
                start[2] += 1e-4;
                start[0] -= 1e-4;
                if let Some(pt) = endemic_via_newton(model, p, controls, &field, &start) {
                    out.push(pt);
                }
            }
        }
        ModelId::SeirAsei
        | ModelId::SirAsi
        | ModelId::SvirPediatric
        | ModelId::SvirMass
        | ModelId::SvirImperfect
        | ModelId::SvirWaning
        | ModelId::SirAsiVaccineControl => {
            let humans = disease_free_humans(model, p);
            let mosquito_dim = model.state_dim() - humans.len();
            let mut trivial = humans.clone();
            trivial.resize(trivial.len() + mosquito_dim, 0.0);
            out.push(checked_point(&field, trivial, EquilibriumKind::TrivialDfe)?);

            let m_qty = offspring_quantity(model, p, controls)?;
            if m_qty > 0.0 {
                let mut brdfe = humans;
                brdfe.extend(brdfe_mosquitoes(model, p, controls, m_qty));
                let brdfe = checked_point(&field, brdfe, EquilibriumKind::Brdfe)?;

                // endemic branch: SIR+ASI has a closed-form xi/chi criterion,
                // the rest use the next-generation threshold
                let endemic_expected = if model == ModelId::SirAsi {
                    let cm = controls[1];
                    let alpha = controls[2];
                    let mm = cm + p.get("mu_m");
                    let xi = p.get("varphi") * mm * mm * (p.get("eta_h") + p.get("mu_h"));
                    let chi = alpha
                        * p.get("k")
                        * p.get("B")
                        * p.get("B")
                        * p.get("beta_hm")
                        * p.get("beta_mh")
                        * m_qty;
                    xi < chi
                } else {
                    next_generation_r0(model, p, controls, &brdfe)
                        .map(|r| r.value > 1.0)
                        .unwrap_or(false)
                };
                out.push(brdfe);

                if endemic_expected {
                    if let Some(pt) = host_vector_endemic(model, p, controls, &field) {
                        out.push(pt);
                    }
                }
            }
        }
        ModelId::Rubella => {
            out.push(checked_point(
                &field,
                vec![1.0, 0.0, 0.0, 1.0],
                EquilibriumKind::TrivialDfe,
            )?);
        }
        ModelId::DengueGoodwill => {
            return Err(AnalysisError::NotDefined {
                model,
                what: "equilibrium analysis (seasonal forcing)",
            })
        }
    }
    Ok(out)
}

/// Stability of an autonomous field at a point: finite-difference Jacobian,
/// eigenvalues, classification by the largest real part.
pub fn classify_field_stability(
    field: &impl Fn(&[f64]) -> Vec<f64>,
    state: &[f64],
) -> (Stability, f64) {
    let jac = linalg::fd_jacobian(&|y: &[f64]| field(y), state, 1e-6, 1e-6);
    let leading = linalg::max_eigenvalue_real_part(&jac);
    let stability = if leading > STABILITY_TOL {
        Stability::Unstable
    } else if leading < -STABILITY_TOL {
        Stability::Stable
    } else {
        Stability::Marginal
    };
    (stability, leading)
}

/// Fills the stability fields of an accepted equilibrium point.
pub fn classify_stability(
    model: ModelId,
    p: &ParameterSet,
    controls: &[f64],
    point: &EquilibriumPoint,
) -> Result<EquilibriumPoint, AnalysisError> {
    let field = autonomous_field(model, p, controls);
    let residual = residual_of(&field, &point.state);
    let tol = RESIDUAL_TOL * state_scale(&point.state);
    if residual > tol {
        return Err(AnalysisError::Residual { residual, tol });
    }
    let (stability, leading) = classify_field_stability(&field, &point.state);
    let mut out = point.clone();
    out.stability = Some(stability);
    out.leading_eigenvalue_real_part = Some(leading);
    Ok(out)
}

fn r0_with_knob(
    model: ModelId,
    p: &ParameterSet,
    controls: &[f64],
    knob: &str,
    value: f64,
) -> Result<f64, AnalysisError> {
    if let Some(pos) = model.control_names().iter().position(|n| *n == knob) {
        let mut c = controls.to_vec();
        c[pos] = value;
        Ok(closed_form_r0(model, p, &c)?.value)
    } else if p.contains(knob) {
        let mut q = p.clone();
        q.set(knob, value);
        Ok(closed_form_r0(model, &q, controls)?.value)
    } else {
        Err(AnalysisError::UnknownKnob(knob.to_string()))
    }
}

/// Control or parameter level at which the reproduction number crosses 1,
/// found by bisection (closed forms returned directly for the vaccination
/// coverages, cross-checked against the bisection).
pub fn critical_control(
    model: ModelId,
    p: &ParameterSet,
    controls: &[f64],
    knob: &str,
    bracket: (f64, f64),
) -> Result<f64, AnalysisError> {
    let (lo, hi) = bracket;
    let f_lo = r0_with_knob(model, p, controls, knob, lo)? - 1.0;
    let f_hi = r0_with_knob(model, p, controls, knob, hi)? - 1.0;
    if f_lo * f_hi > 0.0 {
        return Err(AnalysisError::Bracket {
            lo,
            hi,
            r0_lo: f_lo + 1.0,
            r0_hi: f_hi + 1.0,
        });
    }

    let mut a = lo;
    let mut b = hi;
    let mut fa = f_lo;
    let mut mid = 0.5 * (a + b);
    for _ in 0..200 {
        mid = 0.5 * (a + b);
        let fm = r0_with_knob(model, p, controls, knob, mid)? - 1.0;
        if fm.abs() < 1e-8 || (b - a).abs() < 1e-15 * (hi - lo).abs() {
            break;
        }
        if fa * fm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }

    // vaccination coverages have closed forms; return those after
    // checking the bisection agrees
    let closed = match (model, knob) {
        (ModelId::SvirPediatric, "p") => {
            Some(1.0 - 1.0 / svir_base_r0(p)?)
        }
        (ModelId::SvirMass, "psi") | (ModelId::SvirWaning, "psi") => {
            Some((svir_base_r0(p)? - 1.0) * p.get("mu_h"))
        }
        _ => None,
    };
    if let Some(c) = closed {
        debug_assert!(
            (c - mid).abs() <= 1e-5 * c.abs().max(1.0),
            "closed form {c} vs bisection {mid}"
        );
        return Ok(c);
    }
    Ok(mid)
}
