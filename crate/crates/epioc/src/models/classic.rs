//! Classic compartmental models on population fractions: SIS, SIR with and
//! without demography, SEIR, MSEIR and SEIT (tuberculosis with treatment).
//!
//! All rates are per unit time of the scenario; compartments sum to 1.

#[derive(Debug, Clone, Copy)]
pub struct SisParams {
    pub beta: f64,
    pub gamma: f64,
}

pub fn sis_rhs(p: &SisParams, x: &[f64], dx: &mut [f64]) {
    let (s, i) = (x[0], x[1]);
    dx[0] = p.gamma * i - p.beta * s * i;
    dx[1] = p.beta * s * i - p.gamma * i;
}

#[derive(Debug, Clone, Copy)]
pub struct SirParams {
    pub beta: f64,
    pub gamma: f64,
    /// Birth/death rate; zero for the closed-population variant.
    pub mu: f64,
}

pub fn sir_rhs(p: &SirParams, x: &[f64], dx: &mut [f64]) {
    let (s, i, r) = (x[0], x[1], x[2]);
    dx[0] = p.mu - p.beta * s * i - p.mu * s;
    dx[1] = p.beta * s * i - (p.gamma + p.mu) * i;
    dx[2] = p.gamma * i - p.mu * r;
}

#[derive(Debug, Clone, Copy)]
pub struct SeirParams {
    pub beta: f64,
    pub gamma: f64,
    pub mu: f64,
    pub nu: f64,
}

pub fn seir_rhs(p: &SeirParams, x: &[f64], dx: &mut [f64]) {
    let (s, e, i, r) = (x[0], x[1], x[2], x[3]);
    dx[0] = p.mu - (p.beta * i + p.mu) * s;
    dx[1] = p.beta * s * i - (p.nu + p.mu) * e;
    dx[2] = p.nu * e - (p.gamma + p.mu) * i;
    dx[3] = p.gamma * i - p.mu * r;
}

#[derive(Debug, Clone, Copy)]
pub struct MseirParams {
    pub beta: f64,
    pub gamma: f64,
    pub mu: f64,
    pub nu: f64,
    /// Loss rate of maternal antibodies.
    pub delta: f64,
}

/// Newborns of non-susceptible mothers enter the passively immune class;
/// newborns of susceptible mothers are born susceptible (their birth and
/// death terms cancel in the `S` equation).
pub fn mseir_rhs(p: &MseirParams, x: &[f64], dx: &mut [f64]) {
    let (m, s, e, i, r) = (x[0], x[1], x[2], x[3], x[4]);
    dx[0] = p.mu * (1.0 - s) - (p.delta + p.mu) * m;
    dx[1] = p.delta * m - p.beta * s * i;
    dx[2] = p.beta * s * i - (p.nu + p.mu) * e;
    dx[3] = p.nu * e - (p.gamma + p.mu) * i;
    dx[4] = p.gamma * i - p.mu * r;
}

#[derive(Debug, Clone, Copy)]
pub struct SeitParams {
    pub beta1: f64,
    pub beta2: f64,
    pub mu: f64,
    pub nu: f64,
    /// Fraction of successful treatments of infectious individuals.
    pub q: f64,
    pub r1: f64,
    pub r2: f64,
}

pub fn seit_rhs(p: &SeitParams, x: &[f64], dx: &mut [f64]) {
    let (s, e, i, t) = (x[0], x[1], x[2], x[3]);
    dx[0] = p.mu - (p.beta1 * i + p.mu) * s;
    dx[1] =
        p.beta1 * i * s + p.beta2 * i * t + (1.0 - p.q) * p.r2 * i - (p.nu + p.r1 + p.mu) * e;
    dx[2] = p.nu * e - (p.r2 + p.mu) * i;
    dx[3] = p.r1 * e + p.q * p.r2 * i - (p.beta2 * i + p.mu) * t;
}
