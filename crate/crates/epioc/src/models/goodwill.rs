//! Seasonal mosquito/goodwill model with insecticide and educational
//! campaign investments as controls.
//!
//! States: `x1` mosquito density, `x2` infected-mosquito density, `x3`
//! infected individuals, `x4` level of popular motivation (goodwill).
//! Controls: `u1` insecticide investment, `u2` educational campaigns.
//! Time is measured in weeks; `omega` corresponds to a 52-week season.

#[derive(Debug, Clone, Copy)]
pub struct GoodwillParams {
    pub alpha_r: f64,
    pub alpha_m: f64,
    pub beta: f64,
    pub eta: f64,
    pub mu: f64,
    pub rho: f64,
    pub theta: f64,
    pub tau: f64,
    pub phi: f64,
    pub omega: f64,
    pub cap_p: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GoodwillWeights {
    pub gamma_d: f64,
    pub gamma_s: f64,
    pub gamma_e: f64,
}

fn reproduction(p: &GoodwillParams, t: f64) -> f64 {
    p.alpha_r * (1.0 - p.mu * (p.omega * t + p.phi).sin())
}

pub fn rhs(p: &GoodwillParams, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) {
    let growth = reproduction(p, t) - p.alpha_m - x[3];
    dx[0] = growth * x[0] - u[0];
    dx[1] = growth * x[1] + p.beta * (x[0] - x[1]) * x[2] - u[0];
    dx[2] = -p.eta * x[2] + p.rho * x[1] * (p.cap_p - x[2]);
    dx[3] = -p.tau * x[3] + p.theta * x[2] + u[1];
}

pub fn running_cost(w: &GoodwillWeights, x: &[f64], u: &[f64]) -> f64 {
    w.gamma_d * x[2] * x[2] + w.gamma_s * u[0] * u[0] + w.gamma_e * u[1] * u[1]
}

pub fn adjoint_rhs(
    p: &GoodwillParams,
    w: &GoodwillWeights,
    t: f64,
    x: &[f64],
    l: &[f64],
    _u: &[f64],
    dl: &mut [f64],
) {
    let growth = reproduction(p, t) - p.alpha_m - x[3];
    dl[0] = -l[0] * growth - l[1] * p.beta * x[2];
    dl[1] = -l[1] * (growth - p.beta * x[2]) - l[2] * p.rho * (p.cap_p - x[2]);
    dl[2] = -2.0 * w.gamma_d * x[2] - l[1] * p.beta * (x[0] - x[1])
        + l[2] * (p.eta + p.rho * x[1])
        - l[3] * p.theta;
    dl[3] = l[0] * x[0] + l[1] * x[1] + l[3] * p.tau;
}

pub fn control_law(
    w: &GoodwillWeights,
    l: &[f64],
    bounds: &[(f64, f64)],
    u: &mut [f64],
) {
    use crate::models::host_vector::quadratic_law;
    u[0] = quadratic_law(l[0] + l[1], w.gamma_s, bounds[0].0, bounds[0].1);
    u[1] = quadratic_law(-l[3], w.gamma_e, bounds[1].0, bounds[1].1);
}

pub fn incidence(p: &GoodwillParams, x: &[f64]) -> f64 {
    p.rho * x[1] * (p.cap_p - x[2])
}
